//! The discounted-to-nonconvex conversion driver.
//!
//! Each round the learner proposes an increment `z_t`, the iterate moves to
//! `x_t = x_{t-1} + α_t·z_t` with `α_t ~ Exp(1)`, the stochastic oracle is
//! queried at `x_t`, and `g_t` goes back to the learner. The model EMA
//!
//! ```text
//! x̄_t = ((β − β^t)/(1 − β^t))·x̄_{t-1} + ((1 − β)/(1 − β^t))·x_t
//! ```
//!
//! is the mean of `y_t`, the random iterate with
//! `P(y_t = x_s) = β^{t-s}(1 − β)/(1 − β^t)`.

use alloc::boxed::Box;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::learners::{Learner, LearnerConfig, OnlineLearner};
use crate::numerics::{check_len, ParamVector, RandomStream};
use crate::problems::ProblemSpec;

const ALPHA_SUBSTREAM: u64 = 0;
const ORACLE_SUBSTREAM: u64 = 1;

/// What happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// 1-based round index.
    pub t: u64,
    pub alpha: f64,
    pub z: ParamVector,
    /// Stochastic gradient at the new iterate.
    pub g: ParamVector,
    pub x: ParamVector,
    pub x_bar: ParamVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConversionState {
    pub x: ParamVector,
    pub x_bar: ParamVector,
    pub t: u64,
    pub beta: f64,
    beta_pow: f64,
    alpha_stream: RandomStream,
    oracle_stream: RandomStream,
}

impl ConversionState {
    pub fn new(x0: ParamVector, beta: f64, stream: RandomStream) -> Result<Self> {
        check_conversion_beta(beta)?;
        Ok(Self {
            x_bar: x0.clone(),
            x: x0,
            t: 0,
            beta,
            beta_pow: 1.0,
            alpha_stream: stream.substream(ALPHA_SUBSTREAM),
            oracle_stream: stream.substream(ORACLE_SUBSTREAM),
        })
    }

    /// Advances the EMA with the new iterate `self.x`.
    fn update_ema(&mut self) -> Result<()> {
        self.beta_pow *= self.beta;
        let denom = 1.0 - self.beta_pow;
        let keep = (self.beta - self.beta_pow) / denom;
        let mix = (1.0 - self.beta) / denom;
        self.x_bar.blend(keep, mix, &self.x)
    }
}

fn check_conversion_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid("beta", "the conversion needs β in (0, 1)"))
    }
}

/// Receives every [`StepOutcome`] as the driver produces it.
pub trait StepSink {
    fn on_step(&mut self, outcome: &StepOutcome) -> Result<()>;
}

impl StepSink for Vec<StepOutcome> {
    fn on_step(&mut self, outcome: &StepOutcome) -> Result<()> {
        self.push(outcome.clone());
        Ok(())
    }
}

impl<F> StepSink for F
where
    F: FnMut(&StepOutcome) -> Result<()>,
{
    fn on_step(&mut self, outcome: &StepOutcome) -> Result<()> {
        self(outcome)
    }
}

pub struct Conversion<'p, L> {
    problem: &'p ProblemSpec,
    learner: L,
    state: ConversionState,
}

impl<'p, L: OnlineLearner> Conversion<'p, L> {
    pub fn new(
        problem: &'p ProblemSpec,
        learner: L,
        x0: ParamVector,
        beta: f64,
        stream: RandomStream,
    ) -> Result<Self> {
        check_len(problem.dim(), x0.dim())?;
        check_len(problem.dim(), learner.dim())?;
        Ok(Self {
            problem,
            learner,
            state: ConversionState::new(x0, beta, stream)?,
        })
    }

    pub fn state(&self) -> &ConversionState {
        &self.state
    }

    pub fn learner(&self) -> &L {
        &self.learner
    }

    pub fn problem(&self) -> &ProblemSpec {
        self.problem
    }

    /// Runs one round. Errors carry the 1-based index of the failing round.
    pub fn step(&mut self) -> Result<StepOutcome> {
        let t = self.state.t + 1;
        self.round().map_err(|e| Error::AtStep {
            step: t,
            source: Box::new(e),
        })
    }

    fn round(&mut self) -> Result<StepOutcome> {
        let z = self.learner.next_increment()?;
        let alpha = self.state.alpha_stream.sample_exp1();
        self.state.x.add_scaled(alpha, &z)?;
        let sample = self.problem.sto_grad(&self.state.x, &mut self.state.oracle_stream)?;
        self.learner.observe(&sample.g)?;
        self.state.update_ema()?;
        self.state.t += 1;
        Ok(StepOutcome {
            t: self.state.t,
            alpha,
            z,
            g: sample.g,
            x: self.state.x.clone(),
            x_bar: self.state.x_bar.clone(),
        })
    }

    /// Runs `horizon` rounds, handing each outcome to `sink`.
    pub fn run<S: StepSink + ?Sized>(&mut self, horizon: u64, sink: &mut S) -> Result<()> {
        for _ in 0..horizon {
            let outcome = self.step()?;
            sink.on_step(&outcome).map_err(|e| Error::AtStep {
                step: outcome.t,
                source: Box::new(e),
            })?;
        }
        Ok(())
    }
}

/// Runs the full conversion and returns the whole trajectory.
pub fn run_conversion(
    x0: &ParamVector,
    horizon: u64,
    learner: &LearnerConfig,
    problem: &ProblemSpec,
    beta: f64,
    stream: RandomStream,
) -> Result<Vec<StepOutcome>> {
    if horizon == 0 {
        return Err(Error::invalid("horizon", "must be at least 1"));
    }
    let learner = Learner::new(*learner, x0.dim())?;
    let mut driver = Conversion::new(problem, learner, x0.clone(), beta, stream)?;
    let mut out = Vec::with_capacity(usize::try_from(horizon).unwrap_or(0));
    driver.run(horizon, &mut out)?;
    Ok(out)
}

/// Distribution of `y_t` over `x_1..x_t`: `β^{t-s}(1 − β)/(1 − β^t)`.
pub fn ema_weights(t: usize, beta: f64) -> Vec<f64> {
    if t == 0 {
        return Vec::new();
    }
    if t == 1 {
        return alloc::vec![1.0];
    }
    let norm = (1.0 - beta) / (1.0 - libm::pow(beta, t as f64));
    (1..=t)
        .map(|s| libm::pow(beta, (t - s) as f64) * norm)
        .collect()
}

/// `(1 − β)/(1 − β^t) · Σ_s β^{t-s} x_s`, the non-recursive EMA.
pub fn ema_closed_form(xs: &[ParamVector], beta: f64) -> Result<ParamVector> {
    let first = xs.first().ok_or(Error::EmptyInput)?;
    check_conversion_beta(beta)?;
    let mut acc = ParamVector::zeros(first.dim())?;
    for (w, x) in ema_weights(xs.len(), beta).into_iter().zip(xs) {
        acc.add_scaled(w, x)?;
    }
    Ok(acc)
}
