//! Outage and ergodic capacity of the best port under the Gamma
//! approximation of the per-port power.
//!
//! Thresholds here are normalized power thresholds `gamma' = gamma_th N0 /
//! (P G)`, so a per-port power sample is compared with `gamma'` directly.

use crate::channel::CorrelationMatrix;
use crate::error::{domain, Error, Result};
use crate::gamma_fit::GammaFit;
use crate::integrate::{integrate_1d, Estimate, Tolerance};
use crate::specfun::{digamma, gamma_pq, ln_gamma};
use alloc::vec::Vec;
use core::f64::consts::LN_2;
use nalgebra::DMatrix;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Largest port count accepted by the subset expansion (`2^14 - 1` subsets).
pub const SUBSET_PORT_CAP: usize = 14;

/// Survival level below which the capacity integrand is truncated.
pub const CAPACITY_TAIL_CUTOFF: f64 = 1e-10;

/// Default search limit for the capacity truncation point.
pub const DEFAULT_CAPACITY_LIMIT: f64 = 1e12;

/// Transmit power, gains and noise, reduced to a normalized threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub combined_gain: f64,
    pub noise_psd: f64,
    pub snr_threshold: f64,
    /// `snr_threshold * noise_psd / (tx_power_w * combined_gain)`.
    pub normalized_threshold: f64,
}

/// Builds a [`LinkBudget`].
pub fn normalize_threshold(
    tx_power_w: f64,
    combined_gain: f64,
    noise_psd: f64,
    snr_threshold: f64,
) -> Result<LinkBudget> {
    for (name, v) in [
        ("tx_power_w", tx_power_w),
        ("combined_gain", combined_gain),
        ("noise_psd", noise_psd),
        ("snr_threshold", snr_threshold),
    ] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(domain!("{name} must be finite and > 0, got {v}"));
        }
    }
    Ok(LinkBudget {
        tx_power_w,
        combined_gain,
        noise_psd,
        snr_threshold,
        normalized_threshold: snr_threshold * noise_psd / (tx_power_w * combined_gain),
    })
}

/// `F_S(gamma) = P(alpha, gamma / theta)`.
pub fn single_port_cdf(fit: &GammaFit, gamma: f64) -> f64 {
    single_port_pq(fit, gamma).0
}

/// `(F_S, 1 - F_S)` with the smaller one accurate.
fn single_port_pq(fit: &GammaFit, gamma: f64) -> (f64, f64) {
    if gamma <= 0.0 {
        return (0.0, 1.0);
    }
    gamma_pq(fit.shape, gamma / fit.scale)
}

/// Signed subset expansion
/// `sum_{k=1}^{N} (-1)^{k+1} sum_{|S| = k} det(R_S) F^k` with `F` the
/// single-port CDF at `gamma`.
pub fn outage_exact_subsets(r: &CorrelationMatrix, fit: &GammaFit, gamma: f64) -> Result<f64> {
    let n = r.dim();
    if n == 0 {
        return Err(domain!("subset expansion needs at least one port"));
    }
    if n > SUBSET_PORT_CAP {
        return Err(Error::Complexity { ports: n, cap: SUBSET_PORT_CAP });
    }
    let f = single_port_cdf(fit, gamma);
    // Sum determinants by subset size first so each size gets one power of F.
    let mut by_size = [0.0f64; SUBSET_PORT_CAP + 1];
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        idx.clear();
        idx.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        let m = DMatrix::from_row_slice(idx.len(), idx.len(), &r.principal_submatrix(&idx));
        by_size[idx.len()] += m.determinant();
    }
    let mut total = 0.0;
    for (k, &d) in by_size.iter().enumerate().skip(1).take(n) {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        total += sign * d * f.powi(k as i32);
    }
    Ok(total)
}

/// `det(I - F R)` with `F` the single-port CDF at `gamma`.
///
/// Algebraically this is one minus [`outage_exact_subsets`], so for
/// independent ports it gives `(1 - F)^N` rather than `F^N`.
pub fn outage_determinant_form(r: &CorrelationMatrix, fit: &GammaFit, gamma: f64) -> Result<f64> {
    let n = r.dim();
    if n == 0 {
        return Err(domain!("determinant form needs at least one port"));
    }
    let f = single_port_cdf(fit, gamma);
    let mut m = DMatrix::from_row_slice(n, n, r.entries());
    m.scale_mut(-f);
    for i in 0..n {
        m[(i, i)] += 1.0;
    }
    Ok(m.determinant())
}

/// Independent, comonotone and effective-port outage values.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OutageEnvelope {
    /// `F^N`, all ports independent.
    pub independent_endpoint: f64,
    /// `F`, all ports identical.
    pub comonotone_endpoint: f64,
    /// `F^{N_eff}`.
    pub refined_lower: f64,
    pub n_eff: f64,
    pub rho_avg: f64,
}

/// `N_eff = 1 + (N - 1)(1 - rho_avg)`.
pub fn effective_ports(n: usize, rho_avg: f64) -> f64 {
    1.0 + (n as f64 - 1.0) * (1.0 - rho_avg)
}

/// Envelope of the best-port outage at `gamma`.
pub fn outage_envelope(fit: &GammaFit, gamma: f64, n: usize, rho_avg: f64) -> Result<OutageEnvelope> {
    if n == 0 {
        return Err(domain!("envelope needs at least one port"));
    }
    if !(0.0..=1.0).contains(&rho_avg) {
        return Err(domain!("rho_avg must lie in [0, 1], got {rho_avg}"));
    }
    let f = single_port_cdf(fit, gamma);
    let n_eff = effective_ports(n, rho_avg);
    Ok(OutageEnvelope {
        independent_endpoint: f.powi(n as i32),
        comonotone_endpoint: f,
        refined_lower: f.powf(n_eff),
        n_eff,
        rho_avg,
    })
}

/// Asymptotic regime of the single-port CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    Small,
    Large,
}

/// An asymptotic value with a flag for arguments where neither expansion
/// is reliable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub value: f64,
    /// `gamma / theta` lies in `[0.1, 10]`.
    pub in_transition: bool,
}

/// Small: `x^alpha / (alpha Gamma(alpha))`. Large:
/// `1 - e^{-x} x^{alpha - 1} / Gamma(alpha)`. Here `x = gamma / theta`.
pub fn outage_asymptotic(fit: &GammaFit, gamma: f64, regime: Regime) -> Result<Asymptotic> {
    if !(gamma >= 0.0) {
        return Err(domain!("threshold must be >= 0, got {gamma}"));
    }
    let x = gamma / fit.scale;
    let a = fit.shape;
    let value = match regime {
        Regime::Small => {
            if x == 0.0 {
                0.0
            } else {
                (a * x.ln() - ln_gamma(a + 1.0)).exp()
            }
        }
        Regime::Large => {
            if x == 0.0 {
                if a < 1.0 {
                    f64::NEG_INFINITY
                } else if a == 1.0 {
                    0.0
                } else {
                    1.0
                }
            } else {
                1.0 - (-x + (a - 1.0) * x.ln() - ln_gamma(a)).exp()
            }
        }
    };
    Ok(Asymptotic { value, in_transition: (0.1..=10.0).contains(&x) })
}

/// `(1/ln 2) int_0^inf S(gamma) / (1 + gamma) d gamma` for a survival
/// function `S = 1 - P_out`.
///
/// The integral runs in `u = ln(1 + gamma)`. The upper end is the first
/// power of two where `S < 1e-10`; the neglected tail is estimated from the
/// decay of `S` over the last doubling and added to the error.
pub fn capacity_from_survival<S: Fn(f64) -> f64>(survival: S, upper_limit: f64) -> Result<Estimate> {
    capacity_from_survival_tol(survival, upper_limit, Tolerance { abs: 1e-12, rel: 1e-11, max_cells: 4000 })
}

/// [`capacity_from_survival`] with an explicit tolerance on the integral
/// in nats.
pub(crate) fn capacity_from_survival_tol<S: Fn(f64) -> f64>(
    survival: S,
    upper_limit: f64,
    tol: Tolerance,
) -> Result<Estimate> {
    if !(upper_limit > 0.0) {
        return Err(domain!("upper_limit must be > 0, got {upper_limit}"));
    }
    let mut hi = 1.0f64;
    let mut prev = survival(0.5);
    let mut s = survival(hi);
    while !(s < CAPACITY_TAIL_CUTOFF) {
        if s.is_nan() {
            return Err(domain!("survival function returned NaN at {hi}"));
        }
        if hi >= upper_limit {
            return Err(Error::Integration {
                what: "capacity tail",
                value: s,
                achieved: s,
                requested: CAPACITY_TAIL_CUTOFF,
            });
        }
        hi *= 2.0;
        prev = s;
        s = survival(hi);
    }
    let ratio = if prev > 0.0 { (s / prev).min(0.5) } else { 0.0 };
    let tail = s.max(0.0) * LN_2 / (1.0 - ratio);
    let est = integrate_1d(|u| survival(u.exp_m1()), 0.0, hi.ln_1p(), tol);
    Ok(Estimate {
        value: est.value / LN_2,
        error: (est.error + tail) / LN_2,
        converged: est.converged,
    })
}

/// Capacity from an outage function, `S = 1 - P_out`.
pub fn capacity_exact<F: Fn(f64) -> f64>(outage: F, upper_limit: f64) -> Result<Estimate> {
    capacity_from_survival(|g| 1.0 - outage(g), upper_limit)
}

/// `(lower, upper)`: the single-port capacity and the capacity of the best
/// of `n` independent ports.
pub fn capacity_bounds(fit: &GammaFit, n: usize) -> Result<(Estimate, Estimate)> {
    if n == 0 {
        return Err(domain!("capacity bounds need at least one port"));
    }
    let lower = capacity_from_survival(|g| single_port_pq(fit, g).1, DEFAULT_CAPACITY_LIMIT)?;
    let upper = if n == 1 {
        lower
    } else {
        let nf = n as f64;
        // 1 - (1 - Q)^N without cancellation.
        capacity_from_survival(
            |g| -(nf * (-single_port_pq(fit, g).1).ln_1p()).exp_m1(),
            DEFAULT_CAPACITY_LIMIT,
        )?
    };
    for (what, e) in [("capacity lower bound", &lower), ("capacity upper bound", &upper)] {
        if !e.converged {
            return Err(Error::Integration { what, value: e.value, achieved: e.error, requested: 1e-11 });
        }
    }
    Ok((lower, upper))
}

/// Asymptotic single-port capacity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityAsymptotic {
    pub value: f64,
    /// For the small regime, the scale-free `alpha / ln 2`, which agrees
    /// with `value` only when `theta = 1`. Equal to `value` otherwise.
    pub scale_free: f64,
}

/// Small regime: `log2(1 + g) ~ g / ln 2` gives `alpha theta / ln 2`.
/// Large regime: `log2(1 + g) ~ log2 g` gives `(psi(alpha) + ln theta) / ln 2`.
pub fn capacity_asymptotic(fit: &GammaFit, regime: Regime) -> Result<CapacityAsymptotic> {
    Ok(match regime {
        Regime::Small => CapacityAsymptotic {
            value: fit.shape * fit.scale / LN_2,
            scale_free: fit.shape / LN_2,
        },
        Regime::Large => {
            let v = (digamma(fit.shape)? + fit.scale.ln()) / LN_2;
            CapacityAsymptotic { value: v, scale_free: v }
        }
    })
}

/// Outage of `n_rx`-branch maximal ratio combining in Rayleigh fading:
/// `P(n_rx, x / 2)` with `x = (2^rate - 1) / (Es/N0)`.
pub fn mrc_outage(n_rx: usize, es_over_n0: f64, rate: f64) -> Result<f64> {
    if n_rx == 0 {
        return Err(domain!("MRC needs at least one antenna"));
    }
    if !(es_over_n0 > 0.0) || !(rate >= 0.0) {
        return Err(domain!("Es/N0 must be > 0 and rate >= 0, got {es_over_n0}, {rate}"));
    }
    let x = rate.exp2() - 1.0;
    let x = x / es_over_n0;
    Ok(gamma_pq(n_rx as f64, x / 2.0).0)
}

/// `Es/N0` giving MRC the same mean post-combining SNR, `2 n_rx Es/N0`, as
/// a link with mean SNR `mean_snr`.
pub fn mrc_matched_es_n0(n_rx: usize, mean_snr: f64) -> f64 {
    mean_snr / (2.0 * n_rx as f64)
}
