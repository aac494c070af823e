//! JSON artifacts.

use o2nc_core::analysis::{RunSummary, TheoremParams};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, RunPlan};
use crate::records::FORMAT_VERSION;

pub const STATUS_OK: &str = "OK";
pub const STATUS_VIOLATION: &str = "BOUND_VIOLATION";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremEcho {
    pub beta: f64,
    pub radius: f64,
    pub horizon: u64,
    pub c: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta_bound: f64,
    pub dim: usize,
}

impl From<&TheoremParams> for TheoremEcho {
    fn from(t: &TheoremParams) -> Self {
        Self {
            beta: t.beta,
            radius: t.radius,
            horizon: t.horizon,
            c: t.c,
            lambda: t.lambda,
            epsilon: t.epsilon,
            delta_bound: t.delta_bound,
            dim: t.dim,
        }
    }
}

/// The resolved sizing actually used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanEcho {
    pub problem: String,
    pub dim: usize,
    pub delta_bound: f64,
    pub mode: String,
    pub beta: f64,
    pub effective_learner_beta: f64,
    pub radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub conversion_beta: f64,
    pub horizon: u64,
    pub lambda: f64,
    pub flavor: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theorem: Option<TheoremEcho>,
}

impl From<&RunPlan> for PlanEcho {
    fn from(p: &RunPlan) -> Self {
        Self {
            problem: p.problem.name().to_string(),
            dim: p.problem.dim(),
            delta_bound: p.problem.delta_bound(),
            mode: p.learner.mode.name().to_string(),
            beta: p.learner.beta,
            effective_learner_beta: p.learner.effective_beta(),
            radius: p.learner.radius,
            eta: p.learner.eta,
            conversion_beta: p.conversion_beta,
            horizon: p.horizon,
            lambda: p.lambda,
            flavor: p.flavor.name().to_string(),
            theorem: p.theorem.as_ref().map(TheoremEcho::from),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedMetrics {
    pub seed: u64,
    pub horizon: u64,
    pub mean_stationarity: f64,
    pub final_stationarity: f64,
    pub final_grad_norm: f64,
    pub final_variance: f64,
    pub max_regret_ratio: Option<f64>,
    pub bound_violations: u64,
    pub first_violation: Option<u64>,
    pub variance_mean: f64,
    pub variance_bound: f64,
    pub variance_margin: f64,
    pub variance_ok: bool,
    pub max_increment_ratio: f64,
    pub wall_time_s: f64,
}

impl SeedMetrics {
    pub fn new(seed: u64, s: &RunSummary, wall_time_s: f64) -> Self {
        Self {
            seed,
            horizon: s.horizon,
            mean_stationarity: s.mean_stationarity,
            final_stationarity: s.final_report.value,
            final_grad_norm: s.final_report.grad_norm,
            final_variance: s.final_report.variance,
            max_regret_ratio: s.max_regret_ratio,
            bound_violations: s.bound_violations,
            first_violation: s.first_violation,
            variance_mean: s.variance.lhs,
            variance_bound: s.variance.rhs,
            variance_margin: s.variance.margin,
            variance_ok: s.variance.passed,
            max_increment_ratio: s.max_increment_ratio,
            wall_time_s,
        }
    }

    pub fn bounds_hold(&self) -> bool {
        self.bound_violations == 0 && self.variance_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub seeds: usize,
    pub mean_stationarity_mean: f64,
    pub mean_stationarity_stderr: f64,
    pub final_stationarity_mean: f64,
    pub final_stationarity_stderr: f64,
    pub max_regret_ratio: Option<f64>,
    pub min_variance_margin: f64,
    pub bound_violations: u64,
    pub wall_time_s: f64,
}

/// Sample mean and standard error (`s/√n`, zero for a single sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

impl Aggregate {
    pub fn from_seeds(seeds: &[SeedMetrics], wall_time_s: f64) -> Self {
        let means: Vec<f64> = seeds.iter().map(|s| s.mean_stationarity).collect();
        let finals: Vec<f64> = seeds.iter().map(|s| s.final_stationarity).collect();
        let (mean_stationarity_mean, mean_stationarity_stderr) = mean_stderr(&means);
        let (final_stationarity_mean, final_stationarity_stderr) = mean_stderr(&finals);
        Self {
            seeds: seeds.len(),
            mean_stationarity_mean,
            mean_stationarity_stderr,
            final_stationarity_mean,
            final_stationarity_stderr,
            max_regret_ratio: seeds
                .iter()
                .filter_map(|s| s.max_regret_ratio)
                .reduce(f64::max),
            min_variance_margin: seeds
                .iter()
                .map(|s| s.variance_margin)
                .fold(f64::INFINITY, f64::min),
            bound_violations: seeds.iter().map(|s| s.bound_violations).sum(),
            wall_time_s,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummaryFile {
    pub version: String,
    pub status: String,
    pub config: ExperimentConfig,
    pub plan: PlanEcho,
    pub seeds: Vec<SeedMetrics>,
    pub aggregate: Aggregate,
}

impl RunSummaryFile {
    pub fn new(config: ExperimentConfig, plan: &RunPlan, seeds: Vec<SeedMetrics>, wall: f64) -> Self {
        let ok = seeds.iter().all(SeedMetrics::bounds_hold);
        Self {
            version: FORMAT_VERSION.to_string(),
            status: if ok { STATUS_OK } else { STATUS_VIOLATION }.to_string(),
            aggregate: Aggregate::from_seeds(&seeds, wall),
            config,
            plan: PlanEcho::from(plan),
            seeds,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == STATUS_OK
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEntry {
    pub seed: u64,
    /// First `t` whose running-average witness is at or below the target.
    pub iterations: Option<u64>,
    /// Running average when the run stopped.
    pub running_average: f64,
    pub steps_run: u64,
    pub bound_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComparison {
    pub plan: PlanEcho,
    pub runs: Vec<ThresholdEntry>,
    /// Lower median of `iterations`; runs that never reach the target sort
    /// last and count as `horizon + 1`.
    pub median_iterations: u64,
    pub reached: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareFile {
    pub version: String,
    pub status: String,
    pub config: ExperimentConfig,
    pub target: f64,
    pub modes: Vec<ModeComparison>,
    pub wall_time_s: f64,
}

impl CompareFile {
    pub fn passed(&self) -> bool {
        self.status == STATUS_OK
    }

    pub fn median_for(&self, mode: &str) -> Option<u64> {
        self.modes
            .iter()
            .find(|m| m.plan.mode == mode)
            .map(|m| m.median_iterations)
    }
}

/// Lower median with misses counted as `horizon + 1`.
pub fn median_iterations(runs: &[ThresholdEntry], horizon: u64) -> u64 {
    let mut v: Vec<u64> = runs
        .iter()
        .map(|r| r.iterations.unwrap_or(horizon + 1))
        .collect();
    v.sort_unstable();
    v.get(v.len().saturating_sub(1) / 2).copied().unwrap_or(horizon + 1)
}
