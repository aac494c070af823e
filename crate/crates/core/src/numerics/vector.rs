use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{Error, Result};

/// Dense real vector of fixed dimension `d >= 1` with finite entries.
///
/// Iterates, gradients, increments and comparators all live in this type.
/// Every constructor and every public operation rejects NaN and infinities,
/// so a `ParamVector` in hand is always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyVector);
        }
        check_finite(&entries)?;
        Ok(Self(entries))
    }

    pub fn from_slice(entries: &[f64]) -> Result<Self> {
        Self::new(entries.to_vec())
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::filled(dim, 0.0)
    }

    pub fn filled(dim: usize, value: f64) -> Result<Self> {
        Self::new(vec![value; dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> core::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0.0)
    }

    pub fn l1_norm(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn l2_norm_squared(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn l2_norm(&self) -> f64 {
        libm::sqrt(self.l2_norm_squared())
    }

    pub fn linf_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    pub fn dot(&self, other: &Self) -> Result<f64> {
        self.check_dim(other)?;
        Ok(self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum())
    }

    /// Returns `a·self + y`.
    pub fn axpy(&self, a: f64, y: &Self) -> Result<Self> {
        let mut out = y.clone();
        out.add_scaled(a, self)?;
        Ok(out)
    }

    /// In-place `self ← self + a·x`.
    pub fn add_scaled(&mut self, a: f64, x: &Self) -> Result<()> {
        self.check_dim(x)?;
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s += a * v;
        }
        check_finite(&self.0)
    }

    /// In-place `self ← keep·self + mix·x`; used by every EMA-style recursion.
    pub fn blend(&mut self, keep: f64, mix: f64, x: &Self) -> Result<()> {
        self.check_dim(x)?;
        if !keep.is_finite() || !mix.is_finite() {
            return Err(Error::NonFinite);
        }
        for (s, v) in self.0.iter_mut().zip(&x.0) {
            *s = keep * *s + mix * v;
        }
        check_finite(&self.0)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.0.iter().map(|v| c * v).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Self::new(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn map(&self, f: impl FnMut(f64) -> f64) -> Result<Self> {
        Self::new(self.0.iter().copied().map(f).collect())
    }

    pub(crate) fn check_dim(&self, other: &Self) -> Result<()> {
        check_len(self.dim(), other.dim())
    }
}

impl Index<usize> for ParamVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl<'a> IntoIterator for &'a ParamVector {
    type Item = &'a f64;
    type IntoIter = core::slice::Iter<'a, f64>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

pub(crate) fn check_finite(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub fn l1_norm(x: &ParamVector) -> f64 {
    x.l1_norm()
}

pub fn l2_norm(x: &ParamVector) -> f64 {
    x.l2_norm()
}

pub fn dot(x: &ParamVector, y: &ParamVector) -> Result<f64> {
    x.dot(y)
}

/// `a·x + y`.
pub fn axpy(a: f64, x: &ParamVector, y: &ParamVector) -> Result<ParamVector> {
    x.axpy(a, y)
}

/// Projects `x` onto the Euclidean ball of radius `radius`: `x·min(radius/‖x‖₂, 1)`.
///
/// The scale factor is nudged down until the computed norm of the result is
/// at most `radius`, so the output lies in the ball in floating point and
/// `clip(clip(x, r), r) == clip(x, r)` holds bit for bit.
pub fn clip(x: &ParamVector, radius: f64) -> Result<ParamVector> {
    check_radius(radius)?;
    if x.dim() == 1 {
        return ParamVector::new(vec![clip_scalar(x[0], radius)]);
    }
    let norm = x.l2_norm();
    if !norm.is_finite() {
        // ‖x‖² overflowed; rescale before measuring.
        let peak = x.linf_norm();
        let shrunk = x.scaled(1.0 / peak)?;
        return clip(&shrunk, radius / peak).and_then(|v| v.scaled(peak));
    }
    if norm <= radius {
        return Ok(x.clone());
    }
    let mut scale = radius / norm;
    loop {
        let candidate = x.scaled(scale)?;
        if candidate.l2_norm() <= radius {
            return Ok(candidate);
        }
        scale *= 1.0 - f64::EPSILON;
    }
}

/// One-dimensional clip: `sign(a)·min(|a|, radius)`.
pub fn clip_scalar(a: f64, radius: f64) -> f64 {
    if a.abs() <= radius {
        a
    } else {
        radius.copysign(a)
    }
}

pub(crate) fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid("radius", "must be positive and finite"))
    }
}
