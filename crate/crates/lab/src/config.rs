//! Experiment configuration files.
//!
//! Configs are TOML. Unknown keys anywhere are rejected. A complete example:
//!
//! ```toml
//! seeds = [1, 2, 3]
//! flavor = "l2"          # "l2" (global) or "l1" (coordinate-wise)
//! epsilon = 0.5          # target accuracy; enables theorem sizing
//! lambda = 1.0           # regularization weight of the stationarity measure
//! c = 3.0                # optional; defaults to G+σ (l2) or ‖G+σ‖₁ (l1)
//! horizon = 5000         # optional override of the sized T
//! output_dir = "out"     # optional; --out takes precedence
//!
//! [problem]
//! name = "bounded_wave"  # huber_valley | bounded_wave | hetero_mix
//! dim = 4
//! lipschitz = 1.0        # scalar or list of `dim` values
//! noise = 0.5            # scalar or list
//! x0 = 1.0               # scalar or list
//! huber_delta = 0.1      # huber_valley only
//! heavy = 100.0          # hetero_mix only: H
//! noise_scale = 0.5      # hetero_mix only: s
//!
//! [learner]              # required by `run`
//! mode = "beta_ftrl"     # scale_free_ftrl | beta_ftrl | clipped_adam | discounted_ogd
//! beta = 0.99            # beta and radius: both or neither (neither = sized)
//! radius = 0.0025
//! eta = 0.1              # discounted_ogd only
//!
//! [compare]              # required by `compare`
//! modes = ["clipped_adam", "beta_ftrl"]
//! target = 1.0           # optional; defaults to the guaranteed level
//! eta = 0.1              # needed if modes lists discounted_ogd
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use o2nc_core::analysis::{theorem1_params, theorem2_params, Flavor, TheoremParams};
use o2nc_core::learners::{LearnerConfig, LearnerMode};
use o2nc_core::problems::{ProblemParams, ProblemSpec, DEFAULT_HUBER_DELTA};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

pub const MAX_DIM: usize = 64;
pub const MAX_HORIZON: u64 = 200_000;
pub const MAX_SEEDS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeName {
    ScaleFreeFtrl,
    BetaFtrl,
    ClippedAdam,
    DiscountedOgd,
}

impl From<ModeName> for LearnerMode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::ScaleFreeFtrl => LearnerMode::ScaleFreeFtrl,
            ModeName::BetaFtrl => LearnerMode::BetaFtrl,
            ModeName::ClippedAdam => LearnerMode::ClippedAdam,
            ModeName::DiscountedOgd => LearnerMode::DiscountedOgd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlavorName {
    #[default]
    L2,
    L1,
}

impl From<FlavorName> for Flavor {
    fn from(f: FlavorName) -> Self {
        match f {
            FlavorName::L2 => Flavor::L2,
            FlavorName::L1 => Flavor::L1,
        }
    }
}

/// A scalar broadcast to every coordinate, or one value per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    One(f64),
    Many(Vec<f64>),
}

impl Values {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            Values::One(v) => vec![*v],
            Values::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub name: String,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Values>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub huber_delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heavy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
}

impl ProblemConfig {
    pub fn build(&self) -> Result<ProblemSpec> {
        let is_hetero = self.name == "hetero_mix";
        if is_hetero && (self.lipschitz.is_some() || self.noise.is_some()) {
            return Err(LabError::config(
                "hetero_mix derives lipschitz and noise from heavy and noise_scale",
            ));
        }
        if !is_hetero && (self.heavy.is_some() || self.noise_scale.is_some()) {
            return Err(LabError::config("heavy and noise_scale apply to hetero_mix only"));
        }
        if self.name != "huber_valley" && self.huber_delta.is_some() {
            return Err(LabError::config("huber_delta applies to huber_valley only"));
        }
        let defaults = ProblemParams::default();
        let params = ProblemParams {
            dim: self.dim,
            lipschitz: self.lipschitz.as_ref().map_or(defaults.lipschitz, Values::to_vec),
            noise: self.noise.as_ref().map_or(defaults.noise, Values::to_vec),
            x0: self.x0.as_ref().map_or(defaults.x0, Values::to_vec),
            huber_delta: self.huber_delta.unwrap_or(DEFAULT_HUBER_DELTA),
            heavy: self.heavy.unwrap_or(defaults.heavy),
            noise_scale: self.noise_scale.unwrap_or(defaults.noise_scale),
        };
        Ok(ProblemSpec::build(&self.name, &params)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSection {
    pub mode: ModeName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareSection {
    pub modes: Vec<ModeName>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    /// Step size for a `discounted_ogd` entry in `modes`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub flavor: FlavorName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub problem: ProblemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub learner: Option<LearnerSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<CompareSection>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    /// Checks everything that does not depend on the subcommand.
    pub fn validate(&self, large: bool) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(LabError::config("seeds must not be empty"));
        }
        let distinct: HashSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(LabError::config("seeds must be distinct"));
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(LabError::config("lambda must be nonnegative"));
        }
        if !large {
            if self.problem.dim > MAX_DIM {
                return Err(LabError::config(format!(
                    "dim {} exceeds the desk cap {MAX_DIM}; pass --large to allow it",
                    self.problem.dim
                )));
            }
            if self.seeds.len() > MAX_SEEDS {
                return Err(LabError::config(format!(
                    "{} seeds exceed the desk cap {MAX_SEEDS}; pass --large to allow it",
                    self.seeds.len()
                )));
            }
        }
        Ok(())
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor.into()
    }

    /// The `C` used for sizing: the configured value or the problem's
    /// natural constant (`G+σ`, or `‖G+σ‖₁` for the `l1` flavor).
    pub fn sizing_constant(&self, problem: &ProblemSpec) -> f64 {
        self.c.unwrap_or_else(|| natural_constant(problem, self.flavor()))
    }

    /// Level the theorems guarantee for the averaged witness:
    /// `(1 + K/C)·ε` with `K = G+σ` or `‖G+σ‖₁`.
    pub fn guaranteed_level(&self, problem: &ProblemSpec) -> Option<f64> {
        let eps = self.epsilon?;
        let c = self.sizing_constant(problem);
        Some((1.0 + natural_constant(problem, self.flavor()) / c) * eps)
    }

    fn theorem(&self, problem: &ProblemSpec) -> Result<Option<TheoremParams>> {
        let Some(eps) = self.epsilon else {
            return Ok(None);
        };
        let c = self.sizing_constant(problem);
        let params = match self.flavor() {
            Flavor::L2 => theorem1_params(eps, self.lambda, c, problem.delta_bound())?,
            Flavor::L1 => theorem2_params(eps, self.lambda, c, problem.delta_bound(), problem.dim())?,
        };
        Ok(Some(params))
    }

    /// Resolves `[learner]` into a runnable plan.
    pub fn run_plan(&self, large: bool) -> Result<RunPlan> {
        self.validate(large)?;
        let section = self
            .learner
            .as_ref()
            .ok_or_else(|| LabError::config("`run` needs a [learner] table"))?;
        self.plan_for(section.mode, section.beta, section.radius, section.eta, large)
    }

    /// Resolves one plan per `[compare].modes` entry, all sharing the same
    /// discount, radius and horizon.
    pub fn compare_plans(&self, large: bool) -> Result<Vec<RunPlan>> {
        self.validate(large)?;
        let section = self
            .compare
            .as_ref()
            .ok_or_else(|| LabError::config("`compare` needs a [compare] table"))?;
        if section.modes.len() < 2 {
            return Err(LabError::config("[compare].modes needs at least two entries"));
        }
        section
            .modes
            .iter()
            .map(|&m| self.plan_for(m, None, None, section.eta, large))
            .collect()
    }

    fn plan_for(
        &self,
        mode: ModeName,
        beta: Option<f64>,
        radius: Option<f64>,
        eta: Option<f64>,
        large: bool,
    ) -> Result<RunPlan> {
        let problem = self.problem.build()?;
        let theorem = self.theorem(&problem)?;
        let (beta, radius) = match (beta, radius, &theorem) {
            (Some(b), Some(r), _) => (b, r),
            (None, None, Some(t)) => (t.beta, t.radius),
            (None, None, None) => {
                return Err(LabError::config(
                    "automatic sizing needs epsilon (or give learner beta and radius)",
                ))
            }
            _ => return Err(LabError::config("give both learner beta and radius, or neither")),
        };
        let horizon = match (self.horizon, &theorem) {
            (Some(t), _) => t,
            (None, Some(t)) => t.horizon,
            (None, None) => return Err(LabError::config("horizon needed when epsilon is absent")),
        };
        if horizon == 0 {
            return Err(LabError::config("horizon must be at least 1"));
        }
        if !large && horizon > MAX_HORIZON {
            return Err(LabError::config(format!(
                "horizon {horizon} exceeds the desk cap {MAX_HORIZON}; pass --large to allow it"
            )));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return Err(LabError::config("the conversion needs beta in (0, 1)"));
        }
        let learner = LearnerConfig {
            radius,
            beta,
            mode: mode.into(),
            eta,
        };
        learner.validate()?;
        Ok(RunPlan {
            problem,
            learner,
            conversion_beta: beta,
            horizon,
            lambda: self.lambda,
            flavor: self.flavor(),
            theorem,
        })
    }
}

pub fn natural_constant(problem: &ProblemSpec, flavor: Flavor) -> f64 {
    match flavor {
        Flavor::L2 => problem.lipschitz_l2() + problem.noise_l2(),
        Flavor::L1 => problem.combined_l1(),
    }
}

/// Everything one seeded run needs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunPlan {
    pub problem: ProblemSpec,
    pub learner: LearnerConfig,
    pub conversion_beta: f64,
    pub horizon: u64,
    pub lambda: f64,
    pub flavor: Flavor,
    pub theorem: Option<TheoremParams>,
}
