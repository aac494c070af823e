use crate::error::{Error, Result};
use crate::numerics::{check_radius, ParamVector};

use super::regret::Flavor;

/// Streamed moments of `y_t`, the random iterate whose mean is the model EMA.
///
/// All three fields follow the EMA recursion with the weights
/// `β^{t-s}(1 − β)/(1 − β^t)`, so after `t` updates they hold
/// `E∇F(y_t)`, `E y_t = x̄_t` and `E‖y_t‖²` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarityAccumulator {
    beta: f64,
    beta_pow: f64,
    t: u64,
    grad_ema: ParamVector,
    x_ema: ParamVector,
    x_sqnorm_ema: f64,
}

/// Below this the streamed variance is treated as corrupted rather than
/// rounding noise.
pub const VARIANCE_CLAMP: f64 = -1e-9;

impl StationarityAccumulator {
    pub fn new(dim: usize, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta < 1.0) {
            return Err(Error::invalid("beta", "must lie in (0, 1)"));
        }
        Ok(Self {
            beta,
            beta_pow: 1.0,
            t: 0,
            grad_ema: ParamVector::zeros(dim)?,
            x_ema: ParamVector::zeros(dim)?,
            x_sqnorm_ema: 0.0,
        })
    }

    /// Adds iterate `x_t` with its exact gradient `∇F(x_t)`.
    pub fn update(&mut self, x: &ParamVector, grad: &ParamVector) -> Result<()> {
        self.beta_pow *= self.beta;
        let denom = 1.0 - self.beta_pow;
        let keep = (self.beta - self.beta_pow) / denom;
        let mix = (1.0 - self.beta) / denom;
        self.grad_ema.blend(keep, mix, grad)?;
        self.x_ema.blend(keep, mix, x)?;
        self.x_sqnorm_ema = keep * self.x_sqnorm_ema + mix * x.l2_norm_squared();
        self.t += 1;
        Ok(())
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `E∇F(y_t)`; proportional to the discounted exact-gradient sum.
    pub fn grad_ema(&self) -> &ParamVector {
        &self.grad_ema
    }

    /// `E y_t`, the model EMA `x̄_t`.
    pub fn x_ema(&self) -> &ParamVector {
        &self.x_ema
    }

    pub fn x_sqnorm_ema(&self) -> f64 {
        self.x_sqnorm_ema
    }

    /// `E‖y_t − x̄_t‖² = E‖y_t‖² − ‖x̄_t‖²`, clamped at zero.
    pub fn variance(&self) -> Result<f64> {
        let v = self.x_sqnorm_ema - self.x_ema.l2_norm_squared();
        if v < VARIANCE_CLAMP {
            Err(Error::NegativeVariance(v))
        } else {
            Ok(v.max(0.0))
        }
    }
}

/// The regularized gradient norm evaluated at the witness distribution
/// `law(y_t)`; an upper bound on the infimum over all mean-`x̄_t`
/// distributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StationarityReport {
    pub grad_norm: f64,
    pub variance: f64,
    pub lambda: f64,
    pub value: f64,
    pub flavor: Flavor,
}

pub fn stationarity_report(
    acc: &StationarityAccumulator,
    lambda: f64,
    flavor: Flavor,
) -> Result<StationarityReport> {
    if acc.t == 0 {
        return Err(Error::EmptyInput);
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::invalid("lambda", "must be nonnegative"));
    }
    let grad_norm = flavor.norm(&acc.grad_ema);
    let variance = acc.variance()?;
    Ok(StationarityReport {
        grad_norm,
        variance,
        lambda,
        value: grad_norm + lambda * variance,
        flavor,
    })
}

/// Average witness variance over a run compared with `12·k·D²/(1 − β)²`,
/// where `k = d` for coordinate-wise learners and 1 otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VarianceCheck {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    pub passed: bool,
}

pub fn variance_bound_check(
    mean_variance: f64,
    radius: f64,
    beta: f64,
    coordinate_factor: usize,
) -> Result<VarianceCheck> {
    check_radius(radius)?;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::invalid("beta", "must lie in (0, 1)"));
    }
    let gap = 1.0 - beta;
    let rhs = 12.0 * coordinate_factor as f64 * radius * radius / (gap * gap);
    Ok(VarianceCheck {
        lhs: mean_variance,
        rhs,
        margin: rhs - mean_variance,
        passed: mean_variance <= rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(v: &[f64]) -> ParamVector {
        ParamVector::from_slice(v).unwrap()
    }

    // F(x) = ½‖x‖², so ∇F(x) = x.
    fn two_point() -> StationarityAccumulator {
        let mut acc = StationarityAccumulator::new(2, 0.5).unwrap();
        for x in [pv(&[1.0, 0.0]), pv(&[0.0, 1.0])] {
            acc.update(&x, &x).unwrap();
        }
        acc
    }

    #[test]
    fn two_point_witness_by_hand() {
        let r = stationarity_report(&two_point(), 1.0, Flavor::L2).unwrap();
        let grad = libm::sqrt(5.0) / 3.0;
        assert!((r.grad_norm - grad).abs() < 1e-15);
        assert!((r.variance - 4.0 / 9.0).abs() < 1e-15);
        assert!((r.value - (grad + 4.0 / 9.0)).abs() < 1e-15);
        let r1 = stationarity_report(&two_point(), 1.0, Flavor::L1).unwrap();
        assert!((r1.grad_norm - 1.0).abs() < 1e-15);
        assert_eq!(r1.variance, r.variance);
    }

    #[test]
    fn constant_trajectory_has_no_variance() {
        let mut acc = StationarityAccumulator::new(2, 0.9).unwrap();
        let c = pv(&[0.3, -1.7]);
        for _ in 0..50 {
            acc.update(&c, &c).unwrap();
        }
        let r = stationarity_report(&acc, 10.0, Flavor::L2).unwrap();
        assert!(r.variance < 1e-14);
        assert!((r.grad_norm - c.l2_norm()).abs() < 1e-14);
    }

    #[test]
    fn report_needs_an_update() {
        let acc = StationarityAccumulator::new(1, 0.5).unwrap();
        assert_eq!(stationarity_report(&acc, 1.0, Flavor::L2), Err(Error::EmptyInput));
    }

    #[test]
    fn corrupted_variance_is_an_error() {
        let mut acc = two_point();
        acc.x_sqnorm_ema = 0.0;
        assert!(matches!(acc.variance(), Err(Error::NegativeVariance(_))));
    }

    #[test]
    fn variance_check_arithmetic() {
        let c = variance_bound_check(0.0, 1.0, 0.5, 1).unwrap();
        assert!(c.passed);
        assert_eq!(c.rhs, 48.0);
        let c = variance_bound_check(100.0, 1.0, 0.5, 4).unwrap();
        assert_eq!(c.rhs, 192.0);
        assert_eq!(c.margin, 92.0);
        assert!(!variance_bound_check(50.0, 1.0, 0.5, 1).unwrap().passed);
    }
}
