//! Closed-form parameter choices, stationarity converters, and complexity
//! expressions.

use crate::error::{Error, Result};

/// Discount, radius and horizon that guarantee
/// `E_t E‖∇F(x̄_t)‖_(λ) ≤ (1 + (G+σ)/C)·ε` (or its `ℓ1` analogue).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TheoremParams {
    pub beta: f64,
    pub radius: f64,
    pub horizon: u64,
    pub c: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub delta_bound: f64,
    /// Dimension entering the radius and horizon; 1 for the global learner.
    pub dim: usize,
}

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(name, "must be positive and finite"))
    }
}

/// Rounds `x` up to an integer, first snapping values within `1e-9`
/// relative of an integer so rounding noise never adds an extra step.
fn ceil_snapped(x: f64) -> Result<u64> {
    if !(x.is_finite() && x > 0.0 && x < u64::MAX as f64) {
        return Err(Error::invalid("horizon", "does not fit in 64 bits"));
    }
    let nearest = libm::round(x);
    let t = if (x - nearest).abs() <= 1e-9 * x {
        nearest
    } else {
        libm::ceil(x)
    };
    Ok((t as u64).max(1))
}

/// `β = 1 − (ε/(10C))²`, `D = (1 − β)√ε / (4√(dλ))`,
/// `T = ⌈max{4Δ√(dλ)/ε^{3/2}, 12C/ε} / (1 − β)⌉`.
fn sized(epsilon: f64, lambda: f64, c: f64, delta_bound: f64, dim: usize) -> Result<TheoremParams> {
    check_positive("epsilon", epsilon)?;
    check_positive("lambda", lambda)?;
    check_positive("C", c)?;
    if !(delta_bound.is_finite() && delta_bound >= 0.0) {
        return Err(Error::invalid("delta_bound", "must be nonnegative"));
    }
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    if epsilon >= 10.0 * c {
        return Err(Error::BetaOutOfRange);
    }
    // 1 − β and its reciprocal are formed directly from ε and C so that
    // round inputs give round outputs (1 − β = 0.01 rather than 1 − 0.99).
    let gap = (epsilon * epsilon) / (100.0 * c * c);
    let inv_gap = (100.0 * c * c) / (epsilon * epsilon);
    let beta = 1.0 - gap;
    let root_dl = libm::sqrt(dim as f64 * lambda);
    let radius = gap * libm::sqrt(epsilon) / (4.0 * root_dl);
    let first = 4.0 * delta_bound * root_dl / (epsilon * libm::sqrt(epsilon));
    let second = 12.0 * c / epsilon;
    let horizon = ceil_snapped(inv_gap * first.max(second))?;
    Ok(TheoremParams {
        beta,
        radius,
        horizon,
        c,
        lambda,
        epsilon,
        delta_bound,
        dim,
    })
}

/// Parameters for β-FTRL inside the conversion (global flavor).
pub fn theorem1_params(epsilon: f64, lambda: f64, c: f64, delta_bound: f64) -> Result<TheoremParams> {
    sized(epsilon, lambda, c, delta_bound, 1)
}

/// Parameters for clipped-Adam inside the conversion (`ℓ1` flavor).
pub fn theorem2_params(
    epsilon: f64,
    lambda: f64,
    c: f64,
    delta_bound: f64,
    dim: usize,
) -> Result<TheoremParams> {
    sized(epsilon, lambda, c, delta_bound, dim)
}

/// `λ` for which `(λ, ε)`-stationarity certifies `‖∇F(x)‖ ≤ guarantee`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothConversion {
    pub lambda: f64,
    pub guarantee: f64,
}

/// `L`-smooth objectives: `λ = L²/ε`, gradient norm at most `2ε`.
pub fn convert_smooth(smoothness: f64, epsilon: f64) -> Result<SmoothConversion> {
    check_positive("L", smoothness)?;
    check_positive("epsilon", epsilon)?;
    Ok(SmoothConversion {
        lambda: smoothness * smoothness / epsilon,
        guarantee: 2.0 * epsilon,
    })
}

/// `H`-second-order-smooth objectives: `λ = H/2`, gradient norm at most `2ε`.
pub fn convert_second_order(hessian_lipschitz: f64, epsilon: f64) -> Result<SmoothConversion> {
    check_positive("H", hessian_lipschitz)?;
    check_positive("epsilon", epsilon)?;
    Ok(SmoothConversion {
        lambda: hessian_lipschitz / 2.0,
        guarantee: 2.0 * epsilon,
    })
}

/// A `(λ, ε)`-stationary point of a `G`-Lipschitz function is
/// `(δ, ε′)`-Goldstein stationary with `ε′ = (1 + 2G/(λδ²))·ε`.
pub fn convert_goldstein(lipschitz: f64, lambda: f64, delta: f64, epsilon: f64) -> Result<f64> {
    if !(lipschitz.is_finite() && lipschitz >= 0.0) {
        return Err(Error::invalid("G", "must be nonnegative"));
    }
    check_positive("lambda", lambda)?;
    check_positive("delta", delta)?;
    check_positive("epsilon", epsilon)?;
    Ok((1.0 + 2.0 * lipschitz / (lambda * delta * delta)) * epsilon)
}

/// `(λ/√d, ε/√d)`: a point that is stationary for these parameters is
/// `(λ, ε)`-`ℓ1`-stationary.
pub fn l1_l2_reduction(lambda: f64, epsilon: f64, dim: usize) -> Result<(f64, f64)> {
    if dim == 0 {
        return Err(Error::EmptyVector);
    }
    let root = libm::sqrt(dim as f64);
    Ok((lambda / root, epsilon / root))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityInputs<'a> {
    /// `G = ‖G_vec‖₂`.
    pub lipschitz: f64,
    /// `σ = ‖σ_vec‖₂`.
    pub noise: f64,
    pub delta_bound: f64,
    pub lambda: f64,
    pub epsilon: f64,
    pub lipschitz_vec: &'a [f64],
    pub noise_vec: &'a [f64],
}

/// Bare iteration-complexity expressions (the constants hidden by `O(·)`
/// are dropped). Used for sizing and documentation, not as guarantees.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexityReport {
    pub dim: usize,
    /// `G + σ`.
    pub combined_l2: f64,
    /// `‖G_vec + σ_vec‖₁`.
    pub combined_l1: f64,
    /// `‖G_vec + σ_vec‖₂`.
    pub combined_vec_l2: f64,
    /// `max{(G+σ)²Δλ^{1/2}/ε^{7/2}, (G+σ)³/ε³}`.
    pub global: f64,
    /// `max{‖G+σ‖₁²Δd^{1/2}λ^{1/2}/ε^{7/2}, ‖G+σ‖₁³/ε³}`.
    pub coordinate: f64,
    /// Leading term of the coordinate-wise rate for an `ℓ1` target,
    /// `‖G+σ‖₁²Δd^{1/2}λ^{1/2}ε^{-7/2}`.
    pub coordinate_l1_rate: f64,
    /// The global learner's rate for the same `ℓ1` target, obtained through
    /// the `(λ/√d, ε/√d)` reduction: `‖G+σ‖₂²Δd^{3/2}λ^{1/2}ε^{-7/2}`.
    pub global_l1_rate: f64,
    /// `coordinate_l1_rate / global_l1_rate = ‖G+σ‖₁² / (d·‖G+σ‖₂²)`.
    pub ratio: f64,
}

pub fn complexity_tables(inputs: &ComplexityInputs<'_>) -> Result<ComplexityReport> {
    let ComplexityInputs {
        lipschitz,
        noise,
        delta_bound,
        lambda,
        epsilon,
        lipschitz_vec,
        noise_vec,
    } = *inputs;
    check_positive("epsilon", epsilon)?;
    check_positive("lambda", lambda)?;
    if lipschitz_vec.is_empty() || lipschitz_vec.len() != noise_vec.len() {
        return Err(Error::invalid(
            "lipschitz/noise vectors",
            "must be nonempty and of equal length",
        ));
    }
    let dim = lipschitz_vec.len();
    let d = dim as f64;
    let combined: alloc::vec::Vec<f64> = lipschitz_vec
        .iter()
        .zip(noise_vec)
        .map(|(g, s)| g + s)
        .collect();
    let combined_l1: f64 = combined.iter().map(|v| v.abs()).sum();
    let combined_vec_l2 = libm::sqrt(combined.iter().map(|v| v * v).sum());
    let combined_l2 = lipschitz + noise;

    let eps72 = libm::pow(epsilon, 3.5);
    let eps3 = epsilon * epsilon * epsilon;
    let root_l = libm::sqrt(lambda);
    let root_d = libm::sqrt(d);

    let global = (combined_l2 * combined_l2 * delta_bound * root_l / eps72)
        .max(combined_l2 * combined_l2 * combined_l2 / eps3);
    let coordinate = (combined_l1 * combined_l1 * delta_bound * root_d * root_l / eps72)
        .max(combined_l1 * combined_l1 * combined_l1 / eps3);
    let coordinate_l1_rate = combined_l1 * combined_l1 * delta_bound * root_d * root_l / eps72;
    let global_l1_rate = combined_vec_l2 * combined_vec_l2 * delta_bound * d * root_d * root_l / eps72;
    let ratio = if combined_vec_l2 > 0.0 {
        combined_l1 * combined_l1 / (d * combined_vec_l2 * combined_vec_l2)
    } else {
        1.0
    };
    Ok(ComplexityReport {
        dim,
        combined_l2,
        combined_l1,
        combined_vec_l2,
        global,
        coordinate,
        coordinate_l1_rate,
        global_l1_rate,
        ratio,
    })
}
