//! Counter-based uniform source.
//!
//! Draw `n` of a stream with seed `s` is `mix(s + (n + 1)·GAMMA)`, where `mix`
//! is the SplitMix64 finalizer:
//!
//! ```text
//! GAMMA = 0x9E37_79B9_7F4A_7C15
//! z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//! z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! All arithmetic wraps modulo 2^64. A uniform in `[0, 1)` takes the top 53
//! bits of a draw and multiplies by 2^-53. Exponential draws use the inverse
//! CDF `-ln(1 - U)`. Everything here is integer arithmetic plus one `log1p`
//! from `libm`, so any implementation of these constants reproduces the same
//! stream bit for bit.

pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MIX1: u64 = 0xBF58_476D_1CE4_E5B9;
const MIX2: u64 = 0x94D0_49BB_1331_11EB;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(MIX1);
    z = (z ^ (z >> 27)).wrapping_mul(MIX2);
    z ^ (z >> 31)
}

/// Seeded stream of reproducible draws; `counter` is the index of the next draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RandomStream {
    seed: u64,
    counter: u64,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self { seed, counter: 0 }
    }

    pub fn at(seed: u64, counter: u64) -> Self {
        Self { seed, counter }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// An independent stream keyed by `tag`. Substreams of distinct tags
    /// never share a seed with each other or with the parent.
    pub fn substream(&self, tag: u64) -> Self {
        Self::new(mix64(self.seed ^ mix64(tag.wrapping_add(1).wrapping_mul(GAMMA))))
    }

    /// The draw at `counter` without advancing.
    pub fn peek_u64(&self) -> u64 {
        mix64(
            self.seed
                .wrapping_add(self.counter.wrapping_add(1).wrapping_mul(GAMMA)),
        )
    }

    pub fn next_u64(&mut self) -> u64 {
        let out = self.peek_u64();
        self.counter = self.counter.wrapping_add(1);
        out
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution.
    pub fn next_uniform(&mut self) -> f64 {
        uniform_from_bits(self.next_u64())
    }

    /// A fair coin: `true` with probability 1/2.
    pub fn next_bool(&mut self) -> bool {
        self.next_u64() >> 63 == 1
    }

    /// `Exp(1)` draw via inverse transform.
    pub fn sample_exp1(&mut self) -> f64 {
        exp1_from_uniform(self.next_uniform())
    }
}

#[inline]
pub fn uniform_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Inverse CDF of `Exp(1)`: `-ln(1 - u)` for `u ∈ [0, 1)`.
#[inline]
pub fn exp1_from_uniform(u: f64) -> f64 {
    -libm::log1p(-u)
}

/// Free-function form of [`RandomStream::sample_exp1`]; returns the draw and
/// the advanced stream.
pub fn sample_exp1(stream: RandomStream) -> (f64, RandomStream) {
    let mut s = stream;
    let a = s.sample_exp1();
    (a, s)
}
