//! Generalized hypergeometric function `1F2` by direct series.

use crate::error::{domain, Error, Result};
use alloc::format;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Largest `|z|` accepted by [`hyp1f2`].
pub const HYP1F2_Z_CAP: f64 = 1e4;
/// Relative size of the last retained term at which summation stops.
const TAIL_TOL: f64 = 1e-14;
/// Largest tolerated cancellation error bound relative to the result.
const CANCELLATION_TOL: f64 = 1e-10;
const MAX_TERMS: usize = 20_000;

/// A summed series together with its conditioning data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    /// Number of terms added (including the leading 1).
    pub terms: usize,
    /// Largest term magnitude seen; `max_term * eps / |value|` bounds the
    /// relative rounding error.
    pub max_term: f64,
}

impl SeriesSum {
    /// Bound on the relative error from cancellation among terms.
    pub fn cancellation_bound(&self) -> f64 {
        if self.value == 0.0 {
            return f64::INFINITY;
        }
        self.max_term * self.terms as f64 * f64::EPSILON / self.value.abs()
    }
}

/// `1F2(a; b1, b2; z)`.
///
/// Fails with a range error when cancellation would cost more than
/// `1e-10` relative accuracy or `|z|` exceeds [`HYP1F2_Z_CAP`].
pub fn hyp1f2(a: f64, b1: f64, b2: f64, z: f64) -> Result<f64> {
    let s = hyp1f2_series(a, b1, b2, z)?;
    let bound = s.cancellation_bound();
    if bound > CANCELLATION_TOL {
        return Err(Error::Range(format!(
            "hyp1f2({a}, {b1}, {b2}, {z}): series loses precision (max term {:e}, sum {:e}, \
             relative error bound {bound:e})",
            s.max_term, s.value
        )));
    }
    Ok(s.value)
}

/// Raw series summation without the conditioning check.
pub fn hyp1f2_series(a: f64, b1: f64, b2: f64, z: f64) -> Result<SeriesSum> {
    for (name, v) in [("a", a), ("b1", b1), ("b2", b2), ("z", z)] {
        if !v.is_finite() {
            return Err(domain!("hyp1f2: {name} must be finite, got {v}"));
        }
    }
    for (name, b) in [("b1", b1), ("b2", b2)] {
        if b <= 0.0 && b == b.round() {
            return Err(domain!("hyp1f2: {name} must not be a non-positive integer, got {b}"));
        }
    }
    if z.abs() > HYP1F2_Z_CAP {
        return Err(Error::Range(format!(
            "hyp1f2: |z| = {} exceeds the series cap {HYP1F2_Z_CAP}",
            z.abs()
        )));
    }
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut max_term = 1.0f64;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        let ratio = (a + kf) / ((b1 + kf) * (b2 + kf) * (kf + 1.0)) * z;
        term *= ratio;
        k += 1;
        if term == 0.0 {
            break;
        }
        sum += term;
        max_term = max_term.max(term.abs());
        // Past every parameter magnitude the ratio only decreases, so a
        // ratio below 1/2 bounds the tail by the current term.
        let settled = ratio.abs() < 0.5 && kf + 1.0 > a.abs().max(b1.abs()).max(b2.abs());
        if settled && term.abs() <= TAIL_TOL * sum.abs() {
            break;
        }
        if k >= MAX_TERMS {
            return Err(Error::Range(format!(
                "hyp1f2({a}, {b1}, {b2}, {z}): no convergence after {MAX_TERMS} terms"
            )));
        }
    }
    Ok(SeriesSum { value: sum, terms: k + 1, max_term })
}
