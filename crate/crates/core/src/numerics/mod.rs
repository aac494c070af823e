//! Vector arithmetic, the clipping operator, and the reproducible random source.

mod rng;
mod vector;

pub use rng::{exp1_from_uniform, mix64, sample_exp1, uniform_from_bits, RandomStream, GAMMA};
pub use vector::{axpy, clip, clip_scalar, dot, l1_norm, l2_norm, ParamVector};

pub(crate) use vector::{check_finite, check_len, check_radius};
