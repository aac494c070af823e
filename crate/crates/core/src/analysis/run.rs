use crate::conversion::{StepOutcome, StepSink};
use crate::error::{Error, Result};
use crate::learners::{LearnerConfig, LearnerMode};
use crate::numerics::ParamVector;
use crate::problems::ProblemSpec;

use super::regret::{comparator_direction, BoundCheck, Flavor, RegretLedger};
use super::stationarity::{
    stationarity_report, variance_bound_check, StationarityAccumulator, StationarityReport,
    VarianceCheck,
};

/// Per-round measurements of one conversion run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub t: u64,
    pub alpha: f64,
    /// `‖z_t‖₂`.
    pub z_norm: f64,
    /// `‖∇F(x_t)‖` in the run's flavor.
    pub grad_norm_exact: f64,
    /// Discounted regret against the oracle comparator `u_t`.
    pub regret: f64,
    /// The learner's deterministic regret bound at this round (for
    /// coordinate-wise learners, the sum of the per-coordinate bounds).
    pub regret_bound: f64,
    /// Witness value of `‖∇F(x̄_t)‖_(λ)`.
    pub stationarity_value: f64,
    /// Average of `stationarity_value` over rounds `1..=t`.
    pub running_average: f64,
    /// `‖x̄_t − x̄_{t−1}‖₂`.
    pub ema_drift: f64,
    /// Whether the worst-comparator bound held at this round (`None` when
    /// the learner has no such bound).
    pub bound_ok: Option<bool>,
}

/// End-of-run aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub horizon: u64,
    /// Average over `t` of the witness stationarity value.
    pub mean_stationarity: f64,
    pub final_report: StationarityReport,
    /// Largest regret/bound ratio seen against the worst comparator.
    pub max_regret_ratio: Option<f64>,
    pub bound_violations: u64,
    pub first_violation: Option<u64>,
    pub variance: VarianceCheck,
    /// Largest `‖z_t‖` in the learner's own norm divided by `D`.
    pub max_increment_ratio: f64,
}

impl RunSummary {
    pub fn all_bounds_hold(&self) -> bool {
        self.bound_violations == 0 && self.variance.passed
    }
}

/// Streams conversion outcomes into every analysis accumulator.
///
/// Exact gradients (not the stochastic ones) feed the stationarity
/// accumulator and the oracle comparator; the regret ledgers see exactly
/// what the learner saw.
pub struct RunAnalyzer<'p> {
    problem: &'p ProblemSpec,
    flavor: Flavor,
    lambda: f64,
    learner: LearnerConfig,
    conversion_beta: f64,
    stationarity: StationarityAccumulator,
    oracle_ledger: RegretLedger,
    learner_ledger: RegretLedger,
    prev_x_bar: ParamVector,
    sum_value: f64,
    sum_variance: f64,
    max_ratio: Option<f64>,
    violations: u64,
    first_violation: Option<u64>,
    max_increment_ratio: f64,
    last: Option<StationarityReport>,
}

impl<'p> RunAnalyzer<'p> {
    pub fn new(
        problem: &'p ProblemSpec,
        learner: LearnerConfig,
        conversion_beta: f64,
        lambda: f64,
        flavor: Flavor,
        x0: &ParamVector,
    ) -> Result<Self> {
        learner.validate()?;
        let dim = problem.dim();
        Ok(Self {
            problem,
            flavor,
            lambda,
            learner,
            conversion_beta,
            stationarity: StationarityAccumulator::new(dim, conversion_beta)?,
            oracle_ledger: RegretLedger::new(dim, conversion_beta, learner.radius)?,
            learner_ledger: RegretLedger::new(dim, learner.effective_beta(), learner.radius)?,
            prev_x_bar: x0.clone(),
            sum_value: 0.0,
            sum_variance: 0.0,
            max_ratio: None,
            violations: 0,
            first_violation: None,
            max_increment_ratio: 0.0,
            last: None,
        })
    }

    pub fn stationarity(&self) -> &StationarityAccumulator {
        &self.stationarity
    }

    pub fn learner_ledger(&self) -> &RegretLedger {
        &self.learner_ledger
    }

    fn bound_flavor(&self) -> Flavor {
        if self.learner.mode.is_coordinatewise() {
            Flavor::L1
        } else {
            Flavor::L2
        }
    }

    pub fn process(&mut self, outcome: &StepOutcome) -> Result<StepReport> {
        let grad = self.problem.exact_grad(&outcome.x)?;
        self.stationarity.update(&outcome.x, &grad)?;
        self.oracle_ledger.record(&outcome.g, &outcome.z)?;
        self.learner_ledger.record(&outcome.g, &outcome.z)?;

        let report = stationarity_report(&self.stationarity, self.lambda, self.flavor)?;
        let n = outcome.t as f64;
        self.sum_value += report.value;
        self.sum_variance += report.variance;

        let u = comparator_direction(self.stationarity.grad_ema(), self.learner.radius, self.flavor)?;
        let regret = self.oracle_ledger.discounted_regret(&u)?;

        let bound_flavor = self.bound_flavor();
        let regret_bound = match bound_flavor {
            Flavor::L2 => self.learner_ledger.regret_bound_rhs(),
            Flavor::L1 => self.learner_ledger.coordinate_bound_total(),
        };
        let bound_ok = if self.learner.mode.has_regret_bound() {
            let check: BoundCheck = self.learner_ledger.check_bound(bound_flavor);
            self.max_ratio = Some(self.max_ratio.map_or(check.ratio, |m: f64| m.max(check.ratio)));
            if !check.passed {
                self.violations += 1;
                self.first_violation.get_or_insert(outcome.t);
            }
            Some(check.passed)
        } else {
            None
        };

        let z_size = match bound_flavor {
            Flavor::L2 => outcome.z.l2_norm(),
            Flavor::L1 => outcome.z.linf_norm(),
        };
        self.max_increment_ratio = self.max_increment_ratio.max(z_size / self.learner.radius);

        let ema_drift = outcome.x_bar.sub(&self.prev_x_bar)?.l2_norm();
        self.prev_x_bar = outcome.x_bar.clone();
        self.last = Some(report);

        Ok(StepReport {
            t: outcome.t,
            alpha: outcome.alpha,
            z_norm: outcome.z.l2_norm(),
            grad_norm_exact: self.flavor.norm(&grad),
            regret,
            regret_bound,
            stationarity_value: report.value,
            running_average: self.sum_value / n,
            ema_drift,
            bound_ok,
        })
    }

    pub fn summary(&self) -> Result<RunSummary> {
        let final_report = self.last.ok_or(Error::EmptyInput)?;
        let horizon = self.stationarity.t();
        let n = horizon as f64;
        let mean_variance = self.sum_variance / n;
        let factor = if self.learner.mode == LearnerMode::ClippedAdam {
            self.problem.dim()
        } else {
            1
        };
        let variance =
            variance_bound_check(mean_variance, self.learner.radius, self.conversion_beta, factor)?;
        Ok(RunSummary {
            horizon,
            mean_stationarity: self.sum_value / n,
            final_report,
            max_regret_ratio: self.max_ratio,
            bound_violations: self.violations,
            first_violation: self.first_violation,
            variance,
            max_increment_ratio: self.max_increment_ratio,
        })
    }
}

/// Adapts a [`RunAnalyzer`] into a [`StepSink`], forwarding each report.
pub struct AnalyzingSink<'a, 'p, F> {
    pub analyzer: &'a mut RunAnalyzer<'p>,
    pub on_report: F,
}

impl<F> StepSink for AnalyzingSink<'_, '_, F>
where
    F: FnMut(&StepReport) -> Result<()>,
{
    fn on_step(&mut self, outcome: &StepOutcome) -> Result<()> {
        let report = self.analyzer.process(outcome)?;
        (self.on_report)(&report)
    }
}
