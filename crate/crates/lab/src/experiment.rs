//! Seeded runs, `run` and `compare`.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use o2nc_core::analysis::{Flavor, RunAnalyzer, RunSummary, StepReport};
use o2nc_core::conversion::Conversion;
use o2nc_core::learners::Learner;
use o2nc_core::RandomStream;
use rayon::prelude::*;

use crate::config::{natural_constant, ExperimentConfig, RunPlan};
use crate::error::{LabError, Result};
use crate::records::RecordWriter;
use crate::summary::{
    median_iterations, CompareFile, ModeComparison, PlanEcho, RunSummaryFile, SeedMetrics,
    ThresholdEntry, STATUS_OK, STATUS_VIOLATION,
};

/// Runs one seed of `plan`, handing every step report to `on_report`.
pub fn run_seed_with<F>(plan: &RunPlan, seed: u64, mut on_report: F) -> Result<RunSummary>
where
    F: FnMut(&StepReport) -> Result<()>,
{
    let problem = &plan.problem;
    let learner = Learner::new(plan.learner, problem.dim())?;
    let mut driver = Conversion::new(
        problem,
        learner,
        problem.x0().clone(),
        plan.conversion_beta,
        RandomStream::new(seed),
    )?;
    let mut analyzer = RunAnalyzer::new(
        problem,
        plan.learner,
        plan.conversion_beta,
        plan.lambda,
        plan.flavor,
        problem.x0(),
    )?;
    for _ in 0..plan.horizon {
        let outcome = driver.step()?;
        let report = analyzer.process(&outcome)?;
        on_report(&report)?;
    }
    Ok(analyzer.summary()?)
}

/// Runs one seed without writing any per-step output.
pub fn run_seed(plan: &RunPlan, seed: u64) -> Result<RunSummary> {
    run_seed_with(plan, seed, |_| Ok(()))
}

/// Runs one seed and streams its CSV into `out`.
pub fn run_seed_to<W: Write>(plan: &RunPlan, seed: u64, out: W) -> Result<RunSummary> {
    let mut writer = RecordWriter::new(out).map_err(|e| LabError::io("<csv>", e))?;
    let summary = run_seed_with(plan, seed, |r| {
        writer.write(r).map_err(|e| LabError::io("<csv>", e))
    })?;
    writer.finish().map_err(|e| LabError::io("<csv>", e))?;
    Ok(summary)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| LabError::io(path, e))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

fn ensure_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| LabError::io(path, e))
}

/// `run`: every seed writes `runs/<seed>.csv` and `runs/<seed>.json`; the
/// aggregate goes to `summary.json`.
pub fn cmd_run(config: &ExperimentConfig, out_dir: &Path, large: bool) -> Result<RunSummaryFile> {
    let plan = config.run_plan(large)?;
    let runs = out_dir.join("runs");
    ensure_dir(&runs)?;
    let start = Instant::now();
    let seeds: Vec<SeedMetrics> = config
        .seeds
        .par_iter()
        .map(|&seed| -> Result<SeedMetrics> {
            let t0 = Instant::now();
            let csv_path = runs.join(format!("{seed}.csv"));
            let summary = run_seed_to(&plan, seed, create(&csv_path)?).map_err(|e| match e {
                LabError::Io { source, .. } => LabError::io(&csv_path, source),
                other => other,
            })?;
            let metrics = SeedMetrics::new(seed, &summary, t0.elapsed().as_secs_f64());
            write_json(&runs.join(format!("{seed}.json")), &metrics)?;
            Ok(metrics)
        })
        .collect::<Result<_>>()?;
    let file = RunSummaryFile::new(config.clone(), &plan, seeds, start.elapsed().as_secs_f64());
    write_json(&out_dir.join("summary.json"), &file)?;
    Ok(file)
}

/// Default `compare` target: `(1 + ‖G+σ‖₁/C)·ε`, the level the
/// coordinate-wise guarantee is stated at.
pub fn default_target(config: &ExperimentConfig, plan: &RunPlan) -> Result<f64> {
    let eps = config
        .epsilon
        .ok_or_else(|| LabError::config("compare needs [compare].target or epsilon"))?;
    let k = natural_constant(&plan.problem, Flavor::L1);
    let c = config.c.unwrap_or(k);
    Ok((1.0 + k / c) * eps)
}

/// Runs `plan` under the `ℓ1` witness until its running average reaches
/// `target` or the horizon ends.
pub fn threshold_seed(plan: &RunPlan, seed: u64, target: f64) -> Result<ThresholdEntry> {
    let problem = &plan.problem;
    let learner = Learner::new(plan.learner, problem.dim())?;
    let mut driver = Conversion::new(
        problem,
        learner,
        problem.x0().clone(),
        plan.conversion_beta,
        RandomStream::new(seed),
    )?;
    let mut analyzer = RunAnalyzer::new(
        problem,
        plan.learner,
        plan.conversion_beta,
        plan.lambda,
        Flavor::L1,
        problem.x0(),
    )?;
    let mut running_average = f64::NAN;
    let mut violations = 0;
    for _ in 0..plan.horizon {
        let report = analyzer.process(&driver.step()?)?;
        running_average = report.running_average;
        if report.bound_ok == Some(false) {
            violations += 1;
        }
        if running_average <= target {
            return Ok(ThresholdEntry {
                seed,
                iterations: Some(report.t),
                running_average,
                steps_run: report.t,
                bound_violations: violations,
            });
        }
    }
    Ok(ThresholdEntry {
        seed,
        iterations: None,
        running_average,
        steps_run: plan.horizon,
        bound_violations: violations,
    })
}

/// `compare`: every mode runs on the same seeds with the same theorem-derived
/// sizing; results go to `compare.json` and `compare.csv`.
pub fn compare(config: &ExperimentConfig, large: bool) -> Result<CompareFile> {
    let plans = config.compare_plans(large)?;
    let section = config.compare.as_ref().expect("checked by compare_plans");
    let target = match section.target {
        Some(t) => t,
        None => default_target(config, &plans[0])?,
    };
    if !(target.is_finite() && target > 0.0) {
        return Err(LabError::config("compare target must be positive"));
    }
    let start = Instant::now();
    let jobs: Vec<(usize, u64)> = (0..plans.len())
        .flat_map(|m| config.seeds.iter().map(move |&s| (m, s)))
        .collect();
    let entries: Vec<ThresholdEntry> = jobs
        .par_iter()
        .map(|&(m, seed)| threshold_seed(&plans[m], seed, target))
        .collect::<Result<_>>()?;
    let n = config.seeds.len();
    let modes: Vec<ModeComparison> = plans
        .iter()
        .enumerate()
        .map(|(m, plan)| {
            let runs = entries[m * n..(m + 1) * n].to_vec();
            ModeComparison {
                plan: PlanEcho::from(plan),
                median_iterations: median_iterations(&runs, plan.horizon),
                reached: runs.iter().filter(|r| r.iterations.is_some()).count(),
                runs,
            }
        })
        .collect();
    let clean = entries.iter().all(|e| e.bound_violations == 0);
    Ok(CompareFile {
        version: crate::records::FORMAT_VERSION.to_string(),
        status: if clean { STATUS_OK } else { STATUS_VIOLATION }.to_string(),
        config: config.clone(),
        target,
        modes,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_compare(config: &ExperimentConfig, out_dir: &Path, large: bool) -> Result<CompareFile> {
    let file = compare(config, large)?;
    ensure_dir(out_dir)?;
    write_json(&out_dir.join("compare.json"), &file)?;
    let path = out_dir.join("compare.csv");
    let mut w = create(&path)?;
    let io = |e| LabError::io(&path, e);
    writeln!(w, "# {}", crate::records::FORMAT_VERSION).map_err(io)?;
    writeln!(w, "mode,seed,iterations,steps_run,running_average").map_err(io)?;
    for m in &file.modes {
        for r in &m.runs {
            let it = r.iterations.map_or(String::new(), |v| v.to_string());
            writeln!(
                w,
                "{},{},{},{},{:.16e}",
                m.plan.mode, r.seed, it, r.steps_run, r.running_average
            )
            .map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(file)
}
