//! Bessel functions of integer order.
//!
//! `J0` and `J1` are backed by the `libm` port of the fdlibm rational
//! approximations. The exponentially scaled `I0` is evaluated here: an
//! ascending series below [`I0_SERIES_LIMIT`], the Hankel asymptotic
//! expansion above it.

use super::quadrature::gl12_panels;
use crate::error::{domain, Result};
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

const I0_SERIES_LIMIT: f64 = 20.0;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain!("bessel_j0: argument must be finite, got {x}"));
    }
    Ok(libm::j0(x))
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain!("bessel_j1: argument must be finite, got {x}"));
    }
    Ok(libm::j1(x))
}

/// `J1(x) / x`, continuous through `x = 0` where it equals 1/2.
pub fn bessel_j1_over_x(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain!("bessel_j1_over_x: argument must be finite, got {x}"));
    }
    if x.abs() < 1e-4 {
        // x/2 - x^3/16 + ..., divided by x
        let x2 = x * x;
        return Ok(0.5 - x2 / 16.0 + x2 * x2 / 384.0);
    }
    Ok(libm::j1(x) / x)
}

/// `int_0^x J0(t) dt`, by composite Gauss-Legendre on unit-length panels.
pub fn bessel_j0_integral(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(domain!("bessel_j0_integral: argument must be finite, got {x}"));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let panels = x.abs().ceil() as usize;
    Ok(gl12_panels(libm::j0, 0.0, x, panels))
}

/// `e^{-x} I0(x)` for `x >= 0`.
pub fn bessel_i0_scaled(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(domain!("bessel_i0_scaled: argument must be >= 0, got {x}"));
    }
    Ok(i0e(x))
}

/// Unchecked `e^{-x} I0(x)`; `x` must be non-negative.
pub(crate) fn i0e(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 0.0;
    }
    if x <= I0_SERIES_LIMIT {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        loop {
            term *= q / (k * k);
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // (2k-1)!!^2 / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        let eight_x = 8.0 * x;
        for k in 1..60 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0) * (2.0 * kf - 1.0) / (kf * eight_x);
            if next.abs() > term.abs() {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * core::f64::consts::PI * x).sqrt()
    }
}
