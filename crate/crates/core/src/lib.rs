//! Numerical core for fluid-antenna OTFS satellite link analysis.
//!
//! Everything here is `no_std` (with `alloc`) and pure: special functions,
//! channel construction, Gamma moment matching, outage and capacity
//! analysis, and a block-structured Monte-Carlo sampler whose output does
//! not depend on how blocks are scheduled.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Coefficients are kept digit for digit as tabulated.
#![allow(clippy::excessive_precision)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis_general;
pub mod analysis_singlepath;
pub mod error;
pub mod channel;
pub mod gamma_fit;
pub mod integrate;
pub mod montecarlo;
pub mod rng;
pub mod specfun;

pub use error::{Error, Result};
