//! Standalone regret-bound checks over generated gradient sequences.

use std::path::{Path, PathBuf};

use o2nc_core::analysis::{Flavor, RegretLedger};
use o2nc_core::learners::{Learner, LearnerConfig, LearnerMode, OnlineLearner};
use o2nc_core::{ParamVector, RandomStream};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Independent uniform entries at a per-trial scale.
    Random,
    /// A fixed vector with alternating sign.
    SignFlip,
    /// Random entries that grow by 10^6 halfway through.
    ScaleJump,
    Constant,
    Zero,
    /// Chases the learner: points along its current increment.
    Aligned,
}

impl Generator {
    pub const ALL: [Generator; 6] = [
        Generator::Random,
        Generator::SignFlip,
        Generator::ScaleJump,
        Generator::Constant,
        Generator::Zero,
        Generator::Aligned,
    ];
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    pub horizons: Vec<u64>,
    pub betas: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            dims: vec![1, 2, 8],
            horizons: vec![10, 100, 500],
            betas: vec![0.5, 0.9, 0.99, 1.0],
            trials: 3,
            seed: 0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(LabError::config("dims must be a nonempty list of positive integers"));
        }
        if self.horizons.is_empty() || self.horizons.contains(&0) {
            return Err(LabError::config("horizons must be a nonempty list of positive integers"));
        }
        if self.betas.is_empty() || self.betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(LabError::config("betas must lie in (0, 1]"));
        }
        if self.trials == 0 {
            return Err(LabError::config("trials must be positive"));
        }
        Ok(())
    }
}

const RADII: [f64; 3] = [1.0, 0.01, 100.0];

/// Learners checked at discount `beta`. The scale-free learner ignores the
/// discount, so it runs once, in the `β = 1` cells.
fn learners_for(beta: f64) -> Vec<LearnerMode> {
    let mut v = vec![LearnerMode::BetaFtrl, LearnerMode::ClippedAdam];
    if beta == 1.0 {
        v.push(LearnerMode::ScaleFreeFtrl);
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Case {
    dim: usize,
    horizon: u64,
    beta: f64,
    mode: LearnerMode,
    generator: Generator,
    trial: usize,
    radius: f64,
    stream: RandomStream,
}

/// A failing sequence, replayable with [`replay`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub mode: String,
    pub generator: Generator,
    pub dim: usize,
    pub beta: f64,
    pub radius: f64,
    pub trial: usize,
    /// Round at which the bound first failed.
    pub round: u64,
    pub regret: f64,
    pub bound: f64,
    pub gradients: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dim: usize,
    pub horizon: u64,
    pub beta: f64,
    pub mode: String,
    pub sequences: usize,
    pub max_ratio: f64,
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretCheckReport {
    pub cells: Vec<CellResult>,
    pub sequences: usize,
    pub max_ratio: f64,
    pub violations: Vec<Violation>,
}

impl RegretCheckReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn table(&self) -> String {
        let mut s = format!(
            "{:>4} {:>6} {:>6} {:<16} {:>5} {:>12} {:>5}\n",
            "d", "T", "beta", "learner", "seqs", "max_ratio", "fail"
        );
        for c in &self.cells {
            s.push_str(&format!(
                "{:>4} {:>6} {:>6} {:<16} {:>5} {:>12.6e} {:>5}\n",
                c.dim, c.horizon, c.beta, c.mode, c.sequences, c.max_ratio, c.violations
            ));
        }
        s
    }
}

struct SequenceState {
    fixed: Vec<f64>,
    scale: f64,
}

fn uniform_vec(stream: &mut RandomStream, dim: usize, scale: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| scale * (2.0 * stream.next_uniform() - 1.0))
        .collect()
}

fn next_gradient(
    gen: Generator,
    t: u64,
    horizon: u64,
    z: &ParamVector,
    coordinatewise: bool,
    st: &SequenceState,
    stream: &mut RandomStream,
) -> Vec<f64> {
    let d = z.dim();
    match gen {
        Generator::Random => uniform_vec(stream, d, st.scale),
        Generator::SignFlip => {
            let s = if t.is_multiple_of(2) { st.scale } else { -st.scale };
            st.fixed.iter().map(|v| s * v).collect()
        }
        Generator::ScaleJump => {
            let s = if t > horizon / 2 { 1e6 * st.scale } else { st.scale };
            uniform_vec(stream, d, s)
        }
        Generator::Constant => st.fixed.iter().map(|v| st.scale * v).collect(),
        Generator::Zero => vec![0.0; d],
        Generator::Aligned => {
            let norm = z.l2_norm();
            z.iter()
                .map(|&zi| {
                    let dir = if zi == 0.0 {
                        if stream.next_bool() {
                            1.0
                        } else {
                            -1.0
                        }
                    } else if coordinatewise {
                        zi.signum()
                    } else {
                        zi / norm
                    };
                    st.scale * dir
                })
                .collect()
        }
    }
}

fn bound_flavor(mode: LearnerMode) -> Flavor {
    if mode.is_coordinatewise() {
        Flavor::L1
    } else {
        Flavor::L2
    }
}

struct CaseResult {
    max_ratio: f64,
    violation: Option<Violation>,
}

fn run_case(case: &Case) -> Result<CaseResult> {
    let config = LearnerConfig::new(case.mode, case.radius, case.beta);
    let mut learner = Learner::new(config, case.dim)?;
    let mut ledger = RegretLedger::new(case.dim, config.effective_beta(), case.radius)?;
    let mut stream = case.stream;
    let scale = 10f64.powi((stream.next_u64() % 7) as i32 - 3);
    let st = SequenceState {
        fixed: uniform_vec(&mut stream, case.dim, 1.0),
        scale,
    };
    let flavor = bound_flavor(case.mode);
    let mut gradients = Vec::with_capacity(case.horizon as usize);
    let mut max_ratio: f64 = 0.0;
    let mut first_failure = None;
    for t in 1..=case.horizon {
        let z = learner.next_increment()?;
        let g = ParamVector::new(next_gradient(
            case.generator,
            t,
            case.horizon,
            &z,
            case.mode.is_coordinatewise(),
            &st,
            &mut stream,
        ))?;
        learner.observe(&g)?;
        ledger.record(&g, &z)?;
        gradients.push(g.into_vec());
        let check = ledger.check_bound(flavor);
        max_ratio = max_ratio.max(check.ratio);
        if !check.passed && first_failure.is_none() {
            first_failure = Some((t, check.regret, check.bound));
        }
    }
    let violation = first_failure.map(|(round, regret, bound)| Violation {
        mode: case.mode.name().to_string(),
        generator: case.generator,
        dim: case.dim,
        beta: case.beta,
        radius: case.radius,
        trial: case.trial,
        round,
        regret,
        bound,
        gradients,
    });
    Ok(CaseResult {
        max_ratio,
        violation,
    })
}

/// Feeds a recorded sequence to a fresh learner and returns the largest
/// regret/bound ratio over its prefixes.
pub fn replay(v: &Violation) -> Result<f64> {
    let mode: LearnerMode = v
        .mode
        .parse()
        .map_err(|_| LabError::config(format!("unknown learner {}", v.mode)))?;
    let config = LearnerConfig::new(mode, v.radius, v.beta);
    let mut learner = Learner::new(config, v.dim)?;
    let mut ledger = RegretLedger::new(v.dim, config.effective_beta(), v.radius)?;
    let mut worst: f64 = 0.0;
    for g in &v.gradients {
        let z = learner.next_increment()?;
        let g = ParamVector::from_slice(g)?;
        learner.observe(&g)?;
        ledger.record(&g, &z)?;
        worst = worst.max(ledger.check_bound(bound_flavor(mode)).ratio);
    }
    Ok(worst)
}

pub fn regret_check(grid: &GridSpec) -> Result<RegretCheckReport> {
    grid.validate()?;
    let root = RandomStream::new(grid.seed);
    let mut cells = Vec::new();
    let mut cases = Vec::new();
    for &dim in &grid.dims {
        for &horizon in &grid.horizons {
            for &beta in &grid.betas {
                for mode in learners_for(beta) {
                    let cell = cells.len();
                    cells.push(CellResult {
                        dim,
                        horizon,
                        beta,
                        mode: mode.name().to_string(),
                        sequences: 0,
                        max_ratio: 0.0,
                        violations: 0,
                    });
                    for generator in Generator::ALL {
                        for trial in 0..grid.trials {
                            let tag = cases.len() as u64;
                            cases.push((
                                cell,
                                Case {
                                    dim,
                                    horizon,
                                    beta,
                                    mode,
                                    generator,
                                    trial,
                                    radius: RADII[trial % RADII.len()],
                                    stream: root.substream(tag),
                                },
                            ));
                        }
                    }
                }
            }
        }
    }
    let results: Vec<CaseResult> = cases
        .par_iter()
        .map(|(_, c)| run_case(c))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    for ((cell, _), r) in cases.iter().zip(results) {
        let c = &mut cells[*cell];
        c.sequences += 1;
        c.max_ratio = c.max_ratio.max(r.max_ratio);
        if let Some(v) = r.violation {
            c.violations += 1;
            violations.push(v);
        }
    }
    let max_ratio = cells.iter().map(|c| c.max_ratio).fold(0.0, f64::max);
    Ok(RegretCheckReport {
        sequences: cases.len(),
        cells,
        max_ratio,
        violations,
    })
}

/// Writes `regret_check.json` and one `violation_<k>.json` per failure.
pub fn write_report(report: &RegretCheckReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| LabError::io(out_dir, e))?;
    let summary = serde_json::json!({
        "version": crate::records::FORMAT_VERSION,
        "status": if report.passed() { crate::summary::STATUS_OK } else { crate::summary::STATUS_VIOLATION },
        "sequences": report.sequences,
        "max_ratio": report.max_ratio,
        "cells": report.cells,
        "violations": report.violations.len(),
    });
    let path = out_dir.join("regret_check.json");
    std::fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")
        .map_err(|e| LabError::io(&path, e))?;
    let mut written = vec![path];
    for (k, v) in report.violations.iter().enumerate() {
        let path = out_dir.join(format!("violation_{k}.json"));
        std::fs::write(&path, serde_json::to_string_pretty(v)? + "\n")
            .map_err(|e| LabError::io(&path, e))?;
        written.push(path);
    }
    Ok(written)
}
