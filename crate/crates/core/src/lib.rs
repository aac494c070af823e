//! Discounted online learners driving nonconvex, nonsmooth stochastic
//! optimization.
//!
//! An online learner proposes increments `z_t`; the conversion driver moves
//! the iterate by `α_t·z_t` with `α_t ~ Exp(1)`, queries a stochastic
//! gradient oracle, and feeds the gradient back to the learner. The output
//! candidates are the exponential moving averages of the iterates. The
//! [`analysis`] module measures discounted regret, checks the regret and
//! variance bounds that make this work, and evaluates the regularized
//! stationarity of the EMA iterates.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod conversion;
mod error;
pub mod learners;
pub mod numerics;
pub mod problems;

pub use error::{Error, Result};
pub use numerics::{ParamVector, RandomStream};
