//! Independent reference computations used as test oracles. Nothing here
//! calls into the crate's learner, EMA or accumulator code paths.

#![allow(dead_code)]

/// `−clip_D(D·Σ_{s<t} β^{-s}g_s / √(Σ_{s<t} β^{-2s}‖g_s‖²))` evaluated
/// literally with explicit powers of `β^{-1}`. `grads[s-1]` is `g_s`;
/// returns `z_t`.
pub fn literal_beta_ftrl(grads: &[Vec<f64>], beta: f64, radius: f64, t: usize) -> Vec<f64> {
    let d = grads[0].len();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    for s in 1..t {
        let w = beta.powi(-(s as i32));
        let g = &grads[s - 1];
        for i in 0..d {
            num[i] += w * g[i];
        }
        den += w * w * g.iter().map(|v| v * v).sum::<f64>();
    }
    if den == 0.0 {
        return vec![0.0; d];
    }
    let raw: Vec<f64> = num.iter().map(|v| radius * v / den.sqrt()).collect();
    let norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    let scale = if norm > radius { radius / norm } else { 1.0 };
    raw.iter().map(|v| -v * scale).collect()
}

/// Coordinate-wise version of [`literal_beta_ftrl`] written with the Adam
/// moment sums `Σ β₁^{t-1-s} g_s` and `Σ β₂^{t-1-s} g_s²`, `β₁ = β`, `β₂ = β²`.
pub fn literal_clipped_adam(grads: &[Vec<f64>], beta: f64, radius: f64, t: usize) -> Vec<f64> {
    let d = grads[0].len();
    (0..d)
        .map(|i| {
            let mut m = 0.0;
            let mut v = 0.0;
            for s in 1..t {
                let age = (t - 1 - s) as i32;
                let g = grads[s - 1][i];
                m += beta.powi(age) * g;
                v += (beta * beta).powi(age) * g * g;
            }
            if v == 0.0 {
                0.0
            } else {
                let raw = radius * m / v.sqrt();
                -raw.clamp(-radius, radius)
            }
        })
        .collect()
}

/// Weight of `x_s` (1-based) in `y_t`.
pub fn y_weight(t: usize, s: usize, beta: f64) -> f64 {
    beta.powi((t - s) as i32) * (1.0 - beta) / (1.0 - beta.powi(t as i32))
}

/// `Σ_s w_{t,s}·x_s` summed directly.
pub fn brute_ema(xs: &[Vec<f64>], t: usize, beta: f64) -> Vec<f64> {
    let d = xs[0].len();
    let mut out = vec![0.0; d];
    for s in 1..=t {
        let w = y_weight(t, s, beta);
        for i in 0..d {
            out[i] += w * xs[s - 1][i];
        }
    }
    out
}

/// `E‖y_t − x̄_t‖²` as an explicit weighted sum over the support.
pub fn brute_variance(xs: &[Vec<f64>], t: usize, beta: f64) -> f64 {
    let mean = brute_ema(xs, t, beta);
    (1..=t)
        .map(|s| {
            let w = y_weight(t, s, beta);
            w * xs[s - 1]
                .iter()
                .zip(&mean)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum()
}

/// `Σ_t β^{T-t}⟨g_t, z_t − u⟩` summed directly.
pub fn brute_discounted_regret(gs: &[Vec<f64>], zs: &[Vec<f64>], u: &[f64], beta: f64) -> f64 {
    let big_t = gs.len();
    (1..=big_t)
        .map(|t| {
            let w = beta.powi((big_t - t) as i32);
            w * gs[t - 1]
                .iter()
                .zip(&zs[t - 1])
                .zip(u)
                .map(|((g, z), u)| g * (z - u))
                .sum::<f64>()
        })
        .sum()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300) || a == b
}

pub fn vec_rel_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    let scale = b.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol * scale)
}

/// Small deterministic generator for test inputs (xorshift64*), separate
/// from the crate's counter-based stream.
pub struct TestRng(u64);

impl TestRng {
    pub fn new(seed: u64) -> Self {
        Self(seed.wrapping_mul(0x2545_F491_4F6C_DD1D) | 1)
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.0;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.0 = x;
        x.wrapping_mul(0x2545_F491_4F6C_DD1D)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform on `[lo, hi)`.
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn vec(&mut self, d: usize, scale: f64) -> Vec<f64> {
        (0..d).map(|_| self.range(-scale, scale)).collect()
    }
}
