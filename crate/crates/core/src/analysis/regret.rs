use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::{check_radius, ParamVector};

/// Which norm measures gradients: the global Euclidean flavor or the
/// coordinate-wise `ℓ1` flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Flavor {
    #[default]
    L2,
    L1,
}

impl Flavor {
    pub fn name(self) -> &'static str {
        match self {
            Flavor::L2 => "l2",
            Flavor::L1 => "l1",
        }
    }

    pub fn norm(self, x: &ParamVector) -> f64 {
        match self {
            Flavor::L2 => x.l2_norm(),
            Flavor::L1 => x.l1_norm(),
        }
    }
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Flavor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l2" => Ok(Flavor::L2),
            "l1" => Ok(Flavor::L1),
            _ => Err(Error::invalid("flavor", alloc::format!("expected l2 or l1, got {s:?}"))),
        }
    }
}

/// Relative slack allowed on the deterministic regret bound.
pub const REGRET_SLACK: f64 = 1e-9;

/// Discounted regret accumulators for one learner.
///
/// `Σ_s β^{t-s}⟨g_s, z_s − u⟩ = a_t − ⟨b_t, u⟩` with
/// `a_t = β·a_{t-1} + ⟨g_t, z_t⟩` and `b_t = β·b_{t-1} + g_t`, so regret
/// against any comparator is available at any time without storing the
/// sequence. `c_t = β²·c_{t-1} + ‖g_t‖²` feeds the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger {
    beta: f64,
    radius: f64,
    disc_inner: f64,
    disc_grad_sum: ParamVector,
    disc_sqnorm: f64,
    coord_inner: Vec<f64>,
    coord_sqnorm: Vec<f64>,
    rounds: u64,
}

impl RegretLedger {
    pub fn new(dim: usize, beta: f64, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(Error::invalid("beta", "must lie in (0, 1]"));
        }
        Ok(Self {
            beta,
            radius,
            disc_inner: 0.0,
            disc_grad_sum: ParamVector::zeros(dim)?,
            disc_sqnorm: 0.0,
            coord_inner: vec![0.0; dim],
            coord_sqnorm: vec![0.0; dim],
            rounds: 0,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn rounds(&self) -> u64 {
        self.rounds
    }

    /// `b_t`, the discounted sum of the observed gradients.
    pub fn disc_grad_sum(&self) -> &ParamVector {
        &self.disc_grad_sum
    }

    /// `c_t`, the discounted sum of squared gradient norms.
    pub fn disc_sqnorm(&self) -> f64 {
        self.disc_sqnorm
    }

    /// Records the round where the learner played `z` and then saw `g`.
    pub fn record(&mut self, g: &ParamVector, z: &ParamVector) -> Result<()> {
        let beta = self.beta;
        let beta2 = beta * beta;
        self.disc_inner = beta * self.disc_inner + g.dot(z)?;
        self.disc_grad_sum.blend(beta, 1.0, g)?;
        self.disc_sqnorm = beta2 * self.disc_sqnorm + g.l2_norm_squared();
        for (i, (&gi, &zi)) in g.iter().zip(z).enumerate() {
            self.coord_inner[i] = beta * self.coord_inner[i] + gi * zi;
            self.coord_sqnorm[i] = beta2 * self.coord_sqnorm[i] + gi * gi;
        }
        if !(self.disc_inner.is_finite() && self.disc_sqnorm.is_finite()) {
            return Err(Error::NonFinite);
        }
        self.rounds += 1;
        Ok(())
    }

    /// `Σ_s β^{t-s}⟨g_s, z_s − u⟩`.
    pub fn discounted_regret(&self, u: &ParamVector) -> Result<f64> {
        Ok(self.disc_inner - self.disc_grad_sum.dot(u)?)
    }

    /// `4D·√(Σ_s β^{2(t-s)}‖g_s‖²)`.
    pub fn regret_bound_rhs(&self) -> f64 {
        4.0 * self.radius * libm::sqrt(self.disc_sqnorm)
    }

    /// Regret against the worst comparator in the `D`-ball,
    /// `u* = −D·b_t/‖b_t‖`, which equals `a_t + D‖b_t‖`.
    pub fn worst_ball_regret(&self) -> f64 {
        self.disc_inner + self.radius * self.disc_grad_sum.l2_norm()
    }

    /// Per-coordinate regret against `u*[i] = −D·sign(b_t[i])`.
    pub fn coordinate_worst_regrets(&self) -> Vec<f64> {
        self.coord_inner
            .iter()
            .zip(&self.disc_grad_sum)
            .map(|(a, b)| a + self.radius * b.abs())
            .collect()
    }

    /// Per-coordinate bounds `4D·√(Σ_s β^{2(t-s)} g_s[i]²)`.
    pub fn coordinate_bounds(&self) -> Vec<f64> {
        self.coord_sqnorm
            .iter()
            .map(|c| 4.0 * self.radius * libm::sqrt(*c))
            .collect()
    }

    /// Sum of the per-coordinate bounds.
    pub fn coordinate_bound_total(&self) -> f64 {
        self.coordinate_bounds().iter().sum()
    }

    /// Checks the deterministic bound against the worst comparator: the
    /// global ball for [`Flavor::L2`], every coordinate separately for
    /// [`Flavor::L1`].
    pub fn check_bound(&self, flavor: Flavor) -> BoundCheck {
        match flavor {
            Flavor::L2 => BoundCheck::single(self.worst_ball_regret(), self.regret_bound_rhs()),
            Flavor::L1 => self
                .coordinate_worst_regrets()
                .into_iter()
                .zip(self.coordinate_bounds())
                .map(|(r, b)| BoundCheck::single(r, b))
                .fold(BoundCheck::vacuous(), BoundCheck::merge),
        }
    }
}

/// Outcome of comparing a regret value with its bound. For coordinate-wise
/// checks this holds the coordinate with the largest ratio.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub regret: f64,
    pub bound: f64,
    /// `regret / bound`, or 0 when both vanish.
    pub ratio: f64,
    pub passed: bool,
}

impl BoundCheck {
    pub fn single(regret: f64, bound: f64) -> Self {
        let passed = regret <= bound + REGRET_SLACK * bound;
        let ratio = if bound > 0.0 {
            regret / bound
        } else if regret > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Self {
            regret,
            bound,
            ratio,
            passed,
        }
    }

    fn vacuous() -> Self {
        Self {
            regret: 0.0,
            bound: 0.0,
            ratio: f64::NEG_INFINITY,
            passed: true,
        }
    }

    fn merge(self, other: Self) -> Self {
        let passed = self.passed && other.passed;
        let worst = if other.ratio > self.ratio { other } else { self };
        Self { passed, ..worst }
    }
}

/// The oracle comparator `u_t` built from the discounted exact-gradient sum `w`.
///
/// * `L2`: `−D·w/‖w‖₂`.
/// * `L1`: `−D·sign(w[i])` per coordinate, with 0 where `w[i] = 0`.
///
/// `w = 0` yields the zero comparator.
pub fn comparator_direction(w: &ParamVector, radius: f64, flavor: Flavor) -> Result<ParamVector> {
    check_radius(radius)?;
    match flavor {
        Flavor::L2 => {
            let n = w.l2_norm();
            if n == 0.0 {
                ParamVector::zeros(w.dim())
            } else {
                w.scaled(-radius / n)
            }
        }
        Flavor::L1 => w.map(|wi| if wi == 0.0 { 0.0 } else { -radius.copysign(wi) }),
    }
}
