//! First-order Marcum Q-function.
//!
//! Both tails are returned so callers can use whichever is small without
//! cancellation: `q = Q1(a, b)` is the Rician tail probability and
//! `p = 1 - Q1(a, b)` the Rician CDF.
//!
//! For `a <= POISSON_LIMIT` the Poisson mixture
//! `Q1(a, b) = sum_k Pois(k; a^2/2) Q(k + 1, b^2/2)` is summed with stable
//! incomplete-gamma recurrences (upward for `Q`, downward for `P`). For larger
//! `a` the Rician density `r exp(-(r - a)^2 / 2) e^{-ar} I0(ar)` is integrated
//! with composite Gauss-Legendre panels over the side of `b` that carries
//! the smaller tail.

use super::bessel::i0e;
use super::gamma::{gamma_pq, ln_gamma};
use super::quadrature::gl12_panels;
use crate::error::{domain, Result};
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

const POISSON_LIMIT: f64 = 5.0;
/// Half-width (in standard deviations) of the Poisson window that is summed.
const POISSON_SPAN: f64 = 12.0;
/// Largest integration window past `b`; the density ratio is below
/// `exp(-SPAN^2 / 2)` beyond it.
const DENSITY_SPAN: f64 = 9.0;

/// Both tails of the first-order Marcum Q-function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarcumTails {
    /// `Q1(a, b)`
    pub q: f64,
    /// `1 - Q1(a, b)`
    pub p: f64,
}

/// First-order Marcum Q-function `Q1(a, b)` for `a, b >= 0`.
pub fn marcum_q1(a: f64, b: f64) -> Result<f64> {
    Ok(marcum_q1_tails(a, b)?.q)
}

/// `Q1(a, b)` together with its complement.
pub fn marcum_q1_tails(a: f64, b: f64) -> Result<MarcumTails> {
    if a.is_nan() || b.is_nan() || a < 0.0 || b < 0.0 {
        return Err(domain!("marcum_q1: arguments must be >= 0, got ({a}, {b})"));
    }
    if !a.is_finite() {
        return Err(domain!("marcum_q1: non-centrality must be finite, got {a}"));
    }
    Ok(tails(a, b))
}

/// Unchecked evaluation; arguments must be finite (b may be +inf) and >= 0.
pub(crate) fn tails(a: f64, b: f64) -> MarcumTails {
    if b == 0.0 {
        return MarcumTails { q: 1.0, p: 0.0 };
    }
    if b == f64::INFINITY {
        return MarcumTails { q: 0.0, p: 1.0 };
    }
    if a == 0.0 {
        let q = (-0.5 * b * b).exp();
        return MarcumTails { q, p: -(-0.5 * b * b).exp_m1() };
    }
    if a <= POISSON_LIMIT {
        if b <= a {
            let p = poisson_lower(a, b);
            MarcumTails { q: 1.0 - p, p }
        } else {
            let q = poisson_upper(a, b);
            MarcumTails { q, p: 1.0 - q }
        }
    } else {
        // Away from the peak the density decays like exp(-rate * d) over a
        // distance d from b, so both the window and the panels shrink.
        let rate = (a - b).abs().max(1.0);
        let window = DENSITY_SPAN.min(40.0 / rate);
        let panels = (window * rate / 2.0).ceil() as usize;
        if b <= a {
            let lo = (b - window).max(0.0);
            let p = integrate_density(a, lo, b, panels).min(1.0);
            MarcumTails { q: 1.0 - p, p }
        } else {
            let q = integrate_density(a, b, b + window, panels).min(1.0);
            MarcumTails { q, p: 1.0 - q }
        }
    }
}

/// `Q1` via the Poisson mixture, iterating `Q(k + 1, x)` upward from the
/// bottom of the Poisson window.
fn poisson_upper(a: f64, b: f64) -> f64 {
    let lambda = 0.5 * a * a;
    let x = 0.5 * b * b;
    let ln_lambda = lambda.ln();
    let ln_x = x.ln();
    let k_lo = (lambda - POISSON_SPAN * lambda.sqrt()).floor().max(0.0) as u32;

    let mut k = k_lo as f64;
    let mut ln_w = -lambda + k * ln_lambda - ln_gamma(k + 1.0);
    let mut q_next = gamma_pq(k + 1.0, x).1; // Q(k+1, x)
    // ln of x^{k+1} e^{-x} / (k+1)!, the increment from Q(k+1) to Q(k+2)
    let mut ln_d = (k + 1.0) * ln_x - x - ln_gamma(k + 2.0);
    let mut sum = 0.0;
    for _ in 0..1_000_000 {
        let w = ln_w.exp();
        sum += w * q_next;
        if k + 1.0 > lambda {
            let r = lambda / (k + 1.0);
            let tail_mass = w * r / (1.0 - r);
            if tail_mass <= 1e-17 * sum || tail_mass < 1e-300 {
                break;
            }
        }
        q_next = (q_next + ln_d.exp()).min(1.0);
        k += 1.0;
        ln_w += ln_lambda - k.ln();
        ln_d += ln_x - (k + 1.0).ln();
    }
    sum.min(1.0)
}

/// `1 - Q1` via the Poisson mixture, iterating `P(k + 1, x)` downward from
/// the top of the Poisson window.
fn poisson_lower(a: f64, b: f64) -> f64 {
    let lambda = 0.5 * a * a;
    let x = 0.5 * b * b;
    let ln_lambda = lambda.ln();
    let ln_x = x.ln();
    let k_hi = (lambda + POISSON_SPAN * lambda.sqrt() + POISSON_SPAN).ceil();

    let mut k = k_hi;
    let mut ln_w = -lambda + k * ln_lambda - ln_gamma(k + 1.0);
    let mut p_next = gamma_pq(k + 1.0, x).0; // P(k+1, x)
    // ln of x^k e^{-x} / k!, the increment from P(k+1) to P(k)
    let mut ln_d = k * ln_x - x - ln_gamma(k + 1.0);
    let mut sum = 0.0;
    loop {
        let w = ln_w.exp();
        sum += w * p_next;
        if k == 0.0 {
            break;
        }
        if k < lambda {
            let r = k / lambda;
            let tail_mass = w * r / (1.0 - r);
            if tail_mass <= 1e-17 * sum || tail_mass < 1e-300 {
                break;
            }
        }
        p_next = (p_next + ln_d.exp()).min(1.0);
        ln_w -= ln_lambda - k.ln();
        k -= 1.0;
        ln_d -= ln_x - (k + 1.0).ln();
    }
    sum.min(1.0)
}

/// `int_lo^hi r exp(-(r^2 + a^2)/2) I0(a r) dr` by composite Gauss-Legendre.
fn integrate_density(a: f64, lo: f64, hi: f64, panels: usize) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    gl12_panels(
        |r| {
            let d = r - a;
            r * (-0.5 * d * d).exp() * i0e(a * r)
        },
        lo,
        hi,
        panels.max(1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limits() {
        for &b in &[0.1, 1.0, 2.5, 7.0] {
            let q = marcum_q1(0.0, b).unwrap();
            assert!((q - (-0.5 * b * b).exp()).abs() < 1e-16);
        }
        for &a in &[0.0, 0.5, 3.0, 40.0] {
            assert_eq!(marcum_q1(a, 0.0).unwrap(), 1.0);
        }
        assert!(marcum_q1(-1.0, 1.0).is_err());
        assert!(marcum_q1(1.0, -1.0).is_err());
        assert!(marcum_q1(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn reference_value() {
        let q = marcum_q1(1.0, 1.0).unwrap();
        assert!((q - 0.7328798037).abs() < 1e-10);
    }

    #[test]
    fn equal_arguments_closed_form() {
        // Q1(a, a) = (1 + e^{-a^2} I0(a^2)) / 2
        for &a in &[0.5, 1.5, 4.0, 6.0, 15.0, 60.0] {
            let expect = 0.5 * (1.0 + i0e(a * a));
            let got = marcum_q1(a, a).unwrap();
            assert!(((got - expect) / expect).abs() < 1e-12, "a={a}: {got} vs {expect}");
        }
    }

    #[test]
    fn monotone_and_bounded() {
        for &a in &[0.0, 0.3, 2.0, 4.9, 5.1, 9.0, 30.0] {
            let mut prev = 1.0;
            for i in 0..=300 {
                let b = i as f64 * 0.15;
                let t = marcum_q1_tails(a, b).unwrap();
                assert!((0.0..=1.0).contains(&t.q));
                assert!(t.q <= prev + 1e-15, "a={a} b={b}");
                assert!((t.p + t.q - 1.0).abs() < 1e-14);
                prev = t.q;
            }
        }
        for &b in &[0.5, 2.0, 6.0, 12.0] {
            let mut prev = 0.0;
            for i in 0..=200 {
                let a = i as f64 * 0.1;
                let q = marcum_q1(a, b).unwrap();
                assert!(q >= prev - 1e-14, "a={a} b={b}");
                prev = q;
            }
        }
    }

    #[test]
    fn branches_agree_at_switch() {
        for &b in &[0.5, 3.0, 5.0, 6.5, 9.0] {
            let lo = POISSON_LIMIT;
            let hi = POISSON_LIMIT * (1.0 + 1e-12);
            let x = tails(lo, b);
            let y = tails(hi, b);
            let rel = |u: f64, v: f64| ((u - v) / u.max(1e-300)).abs();
            assert!(rel(x.q, y.q) < 1e-10 && rel(x.p, y.p) < 1e-10, "b={b}: {x:?} {y:?}");
        }
    }
}

