//! Synthetic objectives with exact per-coordinate Lipschitz constants and a
//! bounded, unbiased stochastic gradient oracle.
//!
//! Shipped problems are separable, `F(x) = Σ_i f_i(x_i)`:
//!
//! * `huber_valley`: `f_i(u) = G_i·h(u)` with the Huber function
//!   `h(u) = u²/(2δ)` for `|u| ≤ δ` and `|u| − δ/2` otherwise.
//! * `bounded_wave`: `f_i(u) = (G_i/c_w)·u²/(1 + u²)` with `c_w = 3√3/8`, the
//!   largest slope of `u²/(1 + u²)`, so `sup |f_i'| = G_i` exactly.
//! * `hetero_mix`: `bounded_wave` with `G = (H, 1, …, 1)` and
//!   `σ = (H·s, s, …, s)`: one coordinate dominates both the slope and the
//!   noise.
//!
//! Every problem has infimum 0, so `F(x₀)` itself is the certified bound on
//! `F(x₀) − inf F`.

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::numerics::{check_len, ParamVector, RandomStream};

/// `max_u |d/du (u²/(1+u²))|`, attained at `u = 1/√3`.
pub const WAVE_SLOPE: f64 = 0.649_519_052_838_329; // 3√3/8

pub const DEFAULT_HUBER_DELTA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProblemKind {
    HuberValley { delta: f64 },
    BoundedWave,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    name: String,
    kind: ProblemKind,
    lipschitz: ParamVector,
    noise: ParamVector,
    delta_bound: f64,
    x0: ParamVector,
}

/// Named construction parameters. Vectors of length 1 broadcast to `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemParams {
    pub dim: usize,
    pub lipschitz: Vec<f64>,
    pub noise: Vec<f64>,
    pub x0: Vec<f64>,
    pub huber_delta: f64,
    /// `H` of `hetero_mix`.
    pub heavy: f64,
    /// `s` of `hetero_mix`.
    pub noise_scale: f64,
}

impl Default for ProblemParams {
    fn default() -> Self {
        Self {
            dim: 1,
            lipschitz: vec![1.0],
            noise: vec![0.0],
            x0: vec![1.0],
            huber_delta: DEFAULT_HUBER_DELTA,
            heavy: 100.0,
            noise_scale: 0.0,
        }
    }
}

pub const PROBLEM_NAMES: [&str; 3] = ["huber_valley", "bounded_wave", "hetero_mix"];

fn broadcast(name: &'static str, values: &[f64], dim: usize) -> Result<ParamVector> {
    match values.len() {
        1 => ParamVector::filled(dim, values[0]),
        n if n == dim => ParamVector::from_slice(values),
        n => Err(Error::invalid(
            name,
            alloc::format!("expected 1 or {dim} entries, found {n}"),
        )),
    }
}

impl ProblemSpec {
    pub fn build(name: &str, params: &ProblemParams) -> Result<Self> {
        let dim = params.dim;
        if dim == 0 {
            return Err(Error::EmptyVector);
        }
        let x0 = broadcast("x0", &params.x0, dim)?;
        match name {
            "huber_valley" => Self::huber_valley(
                broadcast("lipschitz", &params.lipschitz, dim)?,
                broadcast("noise", &params.noise, dim)?,
                params.huber_delta,
                x0,
            ),
            "bounded_wave" => Self::bounded_wave(
                broadcast("lipschitz", &params.lipschitz, dim)?,
                broadcast("noise", &params.noise, dim)?,
                x0,
            ),
            "hetero_mix" => Self::hetero_mix(params.heavy, params.noise_scale, x0),
            other => Err(Error::UnknownProblem(other.to_string())),
        }
    }

    pub fn huber_valley(
        lipschitz: ParamVector,
        noise: ParamVector,
        delta: f64,
        x0: ParamVector,
    ) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::invalid("huber_delta", "must be positive"));
        }
        Self::assemble("huber_valley", ProblemKind::HuberValley { delta }, lipschitz, noise, x0)
    }

    pub fn bounded_wave(lipschitz: ParamVector, noise: ParamVector, x0: ParamVector) -> Result<Self> {
        Self::assemble("bounded_wave", ProblemKind::BoundedWave, lipschitz, noise, x0)
    }

    /// `bounded_wave` on `x0.dim()` coordinates with `G = (H, 1, …, 1)` and
    /// `σ = (H·s, s, …, s)`.
    pub fn hetero_mix(heavy: f64, noise_scale: f64, x0: ParamVector) -> Result<Self> {
        if !(heavy.is_finite() && heavy > 0.0) {
            return Err(Error::invalid("heavy", "must be positive"));
        }
        let dim = x0.dim();
        let mut g = vec![1.0; dim];
        g[0] = heavy;
        let mut s = vec![noise_scale; dim];
        s[0] = heavy * noise_scale;
        Self::assemble(
            "hetero_mix",
            ProblemKind::BoundedWave,
            ParamVector::new(g)?,
            ParamVector::new(s)?,
            x0,
        )
    }

    fn assemble(
        name: &str,
        kind: ProblemKind,
        lipschitz: ParamVector,
        noise: ParamVector,
        x0: ParamVector,
    ) -> Result<Self> {
        check_len(x0.dim(), lipschitz.dim())?;
        check_len(x0.dim(), noise.dim())?;
        if lipschitz.iter().any(|&g| g <= 0.0) {
            return Err(Error::invalid("lipschitz", "constants must be positive"));
        }
        if noise.iter().any(|&s| s < 0.0) {
            return Err(Error::invalid("noise", "scales must be nonnegative"));
        }
        let mut spec = Self {
            name: name.to_string(),
            kind,
            lipschitz,
            noise,
            delta_bound: 0.0,
            x0,
        };
        spec.delta_bound = spec.eval_f(&spec.x0)?;
        Ok(spec)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.x0.dim()
    }

    /// Per-coordinate Lipschitz constants `G_i`.
    pub fn lipschitz(&self) -> &ParamVector {
        &self.lipschitz
    }

    /// Per-coordinate noise scales `σ_i`.
    pub fn noise(&self) -> &ParamVector {
        &self.noise
    }

    pub fn x0(&self) -> &ParamVector {
        &self.x0
    }

    /// Certified upper bound on `F(x₀) − inf F`.
    pub fn delta_bound(&self) -> f64 {
        self.delta_bound
    }

    /// `G = ‖G_vec‖₂`.
    pub fn lipschitz_l2(&self) -> f64 {
        self.lipschitz.l2_norm()
    }

    /// `σ = ‖σ_vec‖₂`.
    pub fn noise_l2(&self) -> f64 {
        self.noise.l2_norm()
    }

    /// `‖G_vec + σ_vec‖₁`.
    pub fn combined_l1(&self) -> f64 {
        self.lipschitz.iter().zip(&self.noise).map(|(g, s)| g + s).sum()
    }

    pub fn eval_f(&self, x: &ParamVector) -> Result<f64> {
        check_len(self.dim(), x.dim())?;
        let total = match self.kind {
            ProblemKind::HuberValley { delta } => self
                .lipschitz
                .iter()
                .zip(x)
                .map(|(g, &u)| g * huber(u, delta))
                .sum(),
            ProblemKind::BoundedWave => self
                .lipschitz
                .iter()
                .zip(x)
                .map(|(g, &u)| g / WAVE_SLOPE * (u * u / (1.0 + u * u)))
                .sum(),
        };
        Ok(total)
    }

    pub fn exact_grad(&self, x: &ParamVector) -> Result<ParamVector> {
        check_len(self.dim(), x.dim())?;
        let g: Vec<f64> = match self.kind {
            ProblemKind::HuberValley { delta } => self
                .lipschitz
                .iter()
                .zip(x)
                .map(|(g, &u)| g * (u / delta).clamp(-1.0, 1.0))
                .collect(),
            ProblemKind::BoundedWave => self
                .lipschitz
                .iter()
                .zip(x)
                .map(|(g, &u)| {
                    let q = 1.0 + u * u;
                    g / WAVE_SLOPE * (2.0 * u / (q * q))
                })
                .collect(),
        };
        ParamVector::new(g)
    }

    /// Exact gradient plus independent Rademacher noise `±σ_i` per coordinate.
    pub fn sto_grad(&self, x: &ParamVector, stream: &mut RandomStream) -> Result<OracleSample> {
        let tag = stream.counter();
        let mut g = self.exact_grad(x)?.into_vec();
        for (gi, &s) in g.iter_mut().zip(&self.noise) {
            let sign = if stream.next_bool() { 1.0 } else { -1.0 };
            *gi += sign * s;
        }
        Ok(OracleSample {
            g: ParamVector::new(g)?,
            r: tag,
        })
    }
}

fn huber(u: f64, delta: f64) -> f64 {
    if u.abs() <= delta {
        0.5 * u * u / delta
    } else {
        u.abs() - 0.5 * delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSample {
    pub g: ParamVector,
    /// Stream counter at which this sample's randomness starts.
    pub r: u64,
}
