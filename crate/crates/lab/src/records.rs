//! Per-step CSV output.

use std::io::Write;

use o2nc_core::analysis::StepReport;
use serde::Deserialize;

pub const FORMAT_VERSION: &str = "o2nc-lab v1";
pub const CSV_COLUMNS: [&str; 8] = [
    "t",
    "alpha_t",
    "z_norm",
    "grad_norm_exact",
    "regret",
    "regret_bound",
    "stationarity_value",
    "ema_drift",
];

/// Writes one row per step. Floats carry 17 significant digits so files
/// replay bit for bit.
pub struct RecordWriter<W: Write> {
    out: csv::Writer<W>,
    rows: u64,
}

fn to_io(e: csv::Error) -> std::io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => std::io::Error::other(format!("{other:?}")),
    }
}

impl<W: Write> RecordWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "# {FORMAT_VERSION}")?;
        let mut out = csv::Writer::from_writer(out);
        out.write_record(CSV_COLUMNS).map_err(to_io)?;
        Ok(Self { out, rows: 0 })
    }

    pub fn write(&mut self, r: &StepReport) -> std::io::Result<()> {
        let floats = [
            r.alpha,
            r.z_norm,
            r.grad_norm_exact,
            r.regret,
            r.regret_bound,
            r.stationarity_value,
            r.ema_drift,
        ];
        let mut row = Vec::with_capacity(CSV_COLUMNS.len());
        row.push(r.t.to_string());
        row.extend(floats.iter().map(|v| format!("{v:.16e}")));
        self.out.write_record(&row).map_err(to_io)?;
        self.rows += 1;
        Ok(())
    }

    pub fn rows(&self) -> u64 {
        self.rows
    }

    pub fn finish(self) -> std::io::Result<W> {
        self.out.into_inner().map_err(|e| e.into_error())
    }
}

/// One parsed CSV row, in column order.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct RunRecord {
    pub t: u64,
    pub alpha_t: f64,
    pub z_norm: f64,
    pub grad_norm_exact: f64,
    pub regret: f64,
    pub regret_bound: f64,
    pub stationarity_value: f64,
    pub ema_drift: f64,
}

/// Parses a file produced by [`RecordWriter`].
pub fn parse_records(text: &str) -> Result<Vec<RunRecord>, String> {
    let body = text
        .strip_prefix(&format!("# {FORMAT_VERSION}\n"))
        .ok_or("missing version line")?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers().map_err(|e| e.to_string())?;
    if header.iter().ne(CSV_COLUMNS) {
        return Err("unexpected header".into());
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| e.to_string()))
        .collect()
}
