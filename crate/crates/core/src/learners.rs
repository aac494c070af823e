//! Discounted online linear optimization learners.
//!
//! Every learner keeps the discounted accumulators
//!
//! ```text
//! m_t = β·m_{t-1} + g_t
//! v_t = β²·v_{t-1} + ‖g_t‖²      (or g_t[i]² per coordinate)
//! ```
//!
//! which are the `β^{-s}`-weighted FTRL sums multiplied by `β^t`. The common
//! factor cancels in `m/√v`, so the closed-form FTRL step is evaluated
//! without ever forming `β^{-t}` (which overflows doubles within ~10^5 steps
//! at β = 0.99).

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{check_finite, check_len, check_radius, clip, clip_scalar, ParamVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LearnerMode {
    /// Undiscounted scale-free FTRL on the ball (β fixed to 1).
    ScaleFreeFtrl,
    /// Scale-free FTRL fed the discounted losses `⟨β^{-t} g_t, ·⟩`.
    BetaFtrl,
    /// β-FTRL run independently on every coordinate (Adam with β₁ = β,
    /// β₂ = β², clipping, and no bias correction).
    ClippedAdam,
    /// Fixed-step baseline `-clip(η·m_t, D)` on the discounted gradient sum.
    DiscountedOgd,
}

impl LearnerMode {
    pub const ALL: [LearnerMode; 4] = [
        LearnerMode::ScaleFreeFtrl,
        LearnerMode::BetaFtrl,
        LearnerMode::ClippedAdam,
        LearnerMode::DiscountedOgd,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerMode::ScaleFreeFtrl => "scale_free_ftrl",
            LearnerMode::BetaFtrl => "beta_ftrl",
            LearnerMode::ClippedAdam => "clipped_adam",
            LearnerMode::DiscountedOgd => "discounted_ogd",
        }
    }

    pub fn is_coordinatewise(self) -> bool {
        self == LearnerMode::ClippedAdam
    }

    /// Whether the deterministic discounted-regret bound applies.
    pub fn has_regret_bound(self) -> bool {
        self != LearnerMode::DiscountedOgd
    }
}

impl fmt::Display for LearnerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LearnerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LearnerMode::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid("learner mode", alloc::format!("unknown mode {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LearnerConfig {
    /// Radius `D` of the comparator ball and of the clip.
    pub radius: f64,
    /// Discount `β ∈ (0, 1]`. Ignored by [`LearnerMode::ScaleFreeFtrl`].
    pub beta: f64,
    pub mode: LearnerMode,
    /// Step size, required by [`LearnerMode::DiscountedOgd`] only.
    pub eta: Option<f64>,
}

impl LearnerConfig {
    pub fn new(mode: LearnerMode, radius: f64, beta: f64) -> Self {
        Self {
            radius,
            beta,
            mode,
            eta: None,
        }
    }

    pub fn ogd(radius: f64, beta: f64, eta: f64) -> Self {
        Self {
            radius,
            beta,
            mode: LearnerMode::DiscountedOgd,
            eta: Some(eta),
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_radius(self.radius)?;
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::invalid("beta", "must lie in (0, 1]"));
        }
        if self.mode == LearnerMode::DiscountedOgd {
            match self.eta {
                Some(eta) if eta.is_finite() && eta > 0.0 => {}
                _ => return Err(Error::invalid("eta", "discounted OGD needs a positive eta")),
            }
        }
        Ok(())
    }

    /// The discount the accumulators actually use.
    pub fn effective_beta(&self) -> f64 {
        match self.mode {
            LearnerMode::ScaleFreeFtrl => 1.0,
            _ => self.beta,
        }
    }
}

/// Discounted squared-gradient accumulator.
#[derive(Debug, Clone, PartialEq)]
pub enum SecondMoment {
    Global(f64),
    PerCoordinate(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState {
    /// `m_t = β·m_{t-1} + g_t`.
    pub m: ParamVector,
    pub v: SecondMoment,
    pub t: u64,
}

impl LearnerState {
    pub fn new(dim: usize, mode: LearnerMode) -> Result<Self> {
        let m = ParamVector::zeros(dim)?;
        let v = if mode.is_coordinatewise() {
            SecondMoment::PerCoordinate(vec![0.0; dim])
        } else {
            SecondMoment::Global(0.0)
        };
        Ok(Self { m, v, t: 0 })
    }

    fn check_consistent(&self, config: &LearnerConfig) -> Result<()> {
        match (&self.v, config.mode.is_coordinatewise()) {
            (SecondMoment::PerCoordinate(v), true) => check_len(self.m.dim(), v.len()),
            (SecondMoment::Global(_), false) => Ok(()),
            _ => Err(Error::invalid(
                "learner state",
                "second-moment layout does not match the learner mode",
            )),
        }
    }

    fn check_healthy(&self) -> Result<()> {
        let finite = match &self.v {
            SecondMoment::Global(v) => v.is_finite() && *v >= 0.0,
            SecondMoment::PerCoordinate(v) => v.iter().all(|x| x.is_finite() && *x >= 0.0),
        };
        if finite {
            Ok(())
        } else {
            Err(Error::DivergedState)
        }
    }
}

/// The increment the learner plays next, given its accumulated history.
pub fn next_increment(state: &LearnerState, config: &LearnerConfig) -> Result<ParamVector> {
    state.check_consistent(config)?;
    state.check_healthy()?;
    let radius = config.radius;
    let dim = state.m.dim();
    match (&state.v, config.mode) {
        (SecondMoment::Global(_), LearnerMode::DiscountedOgd) => {
            let eta = config.eta.ok_or_else(|| Error::invalid("eta", "missing"))?;
            let step = state.m.scaled(eta).map_err(|_| Error::DivergedState)?;
            clip(&step, radius)?.scaled(-1.0)
        }
        (SecondMoment::Global(v), _) => {
            if *v == 0.0 {
                return ParamVector::zeros(dim);
            }
            let denom = libm::sqrt(*v);
            let raw: Vec<f64> = state.m.iter().map(|&mi| radius * mi / denom).collect();
            let raw = match ParamVector::new(raw) {
                Ok(raw) => raw,
                // v underflowed relative to m; the clip saturates anyway.
                Err(_) => {
                    let n = state.m.l2_norm();
                    state.m.scaled(radius / n)?
                }
            };
            clip(&raw, radius)?.scaled(-1.0)
        }
        (SecondMoment::PerCoordinate(v), _) => {
            let z: Vec<f64> = state
                .m
                .iter()
                .zip(v)
                .map(|(&mi, &vi)| {
                    if vi == 0.0 {
                        0.0
                    } else {
                        let raw = radius * mi / libm::sqrt(vi);
                        let raw = if raw.is_finite() { raw } else { radius.copysign(mi) };
                        -clip_scalar(raw, radius)
                    }
                })
                .collect();
            ParamVector::new(z)
        }
    }
}

/// Folds one gradient into the discounted accumulators.
pub fn observe_gradient(
    state: &LearnerState,
    g: &ParamVector,
    config: &LearnerConfig,
) -> Result<LearnerState> {
    let mut next = state.clone();
    observe_in_place(&mut next, g, config)?;
    Ok(next)
}

fn observe_in_place(state: &mut LearnerState, g: &ParamVector, config: &LearnerConfig) -> Result<()> {
    state.check_consistent(config)?;
    state.m.check_dim(g)?;
    let beta = config.effective_beta();
    state.m.blend(beta, 1.0, g).map_err(|_| Error::DivergedState)?;
    let beta2 = beta * beta;
    match &mut state.v {
        SecondMoment::Global(v) => {
            *v = beta2 * *v + g.l2_norm_squared();
            if !v.is_finite() {
                return Err(Error::DivergedState);
            }
        }
        SecondMoment::PerCoordinate(v) => {
            for (vi, gi) in v.iter_mut().zip(g) {
                *vi = beta2 * *vi + gi * gi;
            }
            check_finite(v).map_err(|_| Error::DivergedState)?;
        }
    }
    state.t += 1;
    Ok(())
}

/// A learner of increments for the conversion driver.
pub trait OnlineLearner {
    fn dim(&self) -> usize;
    fn next_increment(&self) -> Result<ParamVector>;
    /// Receives the linear loss `⟨g, ·⟩` for the round just played.
    fn observe(&mut self, g: &ParamVector) -> Result<()>;
}

/// Owns a [`LearnerConfig`] together with its [`LearnerState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Learner {
    config: LearnerConfig,
    state: LearnerState,
}

impl Learner {
    pub fn new(config: LearnerConfig, dim: usize) -> Result<Self> {
        config.validate()?;
        let state = LearnerState::new(dim, config.mode)?;
        Ok(Self { config, state })
    }

    pub fn config(&self) -> &LearnerConfig {
        &self.config
    }

    pub fn state(&self) -> &LearnerState {
        &self.state
    }
}

impl OnlineLearner for Learner {
    fn dim(&self) -> usize {
        self.state.m.dim()
    }

    fn next_increment(&self) -> Result<ParamVector> {
        next_increment(&self.state, &self.config)
    }

    fn observe(&mut self, g: &ParamVector) -> Result<()> {
        check_finite(g.as_slice())?;
        observe_in_place(&mut self.state, g, &self.config)
    }
}
