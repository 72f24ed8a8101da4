//! Moments of the per-port power `|h_k|^2` and its Gamma approximation.
//!
//! The channel at one port is treated as `h_k = M + Y` with
//! `M = sum_p alpha_p mu_{p,k}` and `Y ~ CN(0, Sigma^2)`,
//! `Sigma^2 = sum_p alpha_p^2 sigma_p^2`, which gives the fourth moment
//! `|M|^4 + 4 |M|^2 Sigma^2 + 2 Sigma^4`. Port correlation enters the
//! variance through a normalized, capped Bessel-kernel term.

use crate::channel::{correlation_matrix, ClusterParams, FasGeometry};
use crate::error::{domain, Error, Result};
use crate::specfun::{normal_cdf, reg_lower_gamma};
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Default cap fraction for the correlation term.
pub const DEFAULT_ETA: f64 = 0.5;

/// Admissible range of the cap fraction.
pub const ETA_RANGE: (f64, f64) = (0.1, 1.0);

/// Slack below zero tolerated in the uncorrelated variance before it is
/// treated as an error rather than rounding.
const NEGATIVE_VARIANCE_TOL: f64 = 1e-12;

/// Fewest samples accepted by [`fit_quality`].
pub const MIN_KS_SAMPLES: usize = 1000;

/// `Gamma(shape, scale)` matched to a mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GammaFit {
    pub shape: f64,
    pub scale: f64,
    pub mean: f64,
    pub variance: f64,
    /// `variance + mean^2`.
    pub second_moment: f64,
    pub eta: f64,
}

impl GammaFit {
    /// `P(shape, x / scale)`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        // Parameters are validated at construction, so this cannot fail.
        reg_lower_gamma(self.shape, x / self.scale).unwrap_or(f64::NAN)
    }
}

fn check_port(clusters: &[ClusterParams], port: usize) -> Result<()> {
    if clusters.is_empty() {
        return Err(domain!("need at least one cluster"));
    }
    for c in clusters {
        if port >= c.specular_means.len() {
            return Err(Error::Dimension { expected: port + 1, found: c.specular_means.len() });
        }
        if !(c.diffuse_variance >= 0.0) || !c.tap_gain.is_finite() {
            return Err(domain!("cluster has negative diffuse variance or non-finite gain"));
        }
    }
    Ok(())
}

/// `E|h_k|^2 = sum_p alpha_p^2 (|mu_{p,k}|^2 + sigma_p^2)`.
pub fn first_moment(clusters: &[ClusterParams], port: usize) -> Result<f64> {
    check_port(clusters, port)?;
    Ok(clusters.iter().map(|c| c.mean_power(port)).sum())
}

/// `(M, Sigma^2)` at `port`.
fn rician_equivalent(clusters: &[ClusterParams], port: usize) -> (Complex64, f64) {
    let mut m = Complex64::new(0.0, 0.0);
    let mut s2 = 0.0;
    for c in clusters {
        m += c.specular_means[port] * c.tap_gain;
        s2 += c.tap_gain * c.tap_gain * c.diffuse_variance;
    }
    (m, s2)
}

/// `|M|^4 + 4 |M|^2 Sigma^2 + 2 Sigma^4 - M1^2`, ignoring port correlation.
///
/// Values in `[-1e-12, 0)` are rounding around an exact zero and are
/// returned as 0; anything more negative is an error.
pub fn variance_uncorrelated(clusters: &[ClusterParams], port: usize) -> Result<f64> {
    let m1 = first_moment(clusters, port)?;
    let (m, s2) = rician_equivalent(clusters, port);
    let a = m.norm_sqr();
    let var = a * a + 4.0 * a * s2 + 2.0 * s2 * s2 - m1 * m1;
    if var < -NEGATIVE_VARIANCE_TOL * m1.max(1.0).powi(2) {
        return Err(Error::Numerical(alloc::format!(
            "uncorrelated variance is negative ({var:e}) at port {port}; the specular means of \
             several clusters interfere, so the single-Rician equivalent does not apply"
        )));
    }
    Ok(var.max(0.0))
}

fn check_eta(eta: f64) -> Result<()> {
    if !(ETA_RANGE.0..=ETA_RANGE.1).contains(&eta) {
        return Err(domain!("eta must lie in [{}, {}], got {eta}", ETA_RANGE.0, ETA_RANGE.1));
    }
    Ok(())
}

/// `(2 / N^2) sum_{i != j} J0(2 pi |i - j| W / (N - 1)) M1^2`.
pub fn correlation_term(geom: &FasGeometry, m1: f64) -> Result<f64> {
    let n = geom.num_ports as f64;
    let off = correlation_matrix(geom)?.off_diagonal_sum();
    Ok(2.0 / (n * n) * off * m1 * m1)
}

/// Variance with the normalized correlation term capped at `eta` times
/// the uncorrelated variance, evaluated at the reference port.
pub fn variance_corrected(clusters: &[ClusterParams], geom: &FasGeometry, eta: f64) -> Result<f64> {
    check_eta(eta)?;
    let port = geom.reference_port();
    let m1 = first_moment(clusters, port)?;
    let var = variance_uncorrelated(clusters, port)?;
    Ok(var + correlation_term(geom, m1)?.min(eta * var))
}

/// Variance with the raw correlation term `2 sum_{i != j} J0(..) M1^2`,
/// before normalization and capping. Kept for comparison; it overstates the
/// spread badly.
pub fn variance_uncapped(clusters: &[ClusterParams], geom: &FasGeometry) -> Result<f64> {
    let port = geom.reference_port();
    let m1 = first_moment(clusters, port)?;
    let var = variance_uncorrelated(clusters, port)?;
    let off = correlation_matrix(geom)?.off_diagonal_sum();
    Ok(var + 2.0 * off * m1 * m1)
}

/// Moment-matched `Gamma(M1^2 / Var, Var / M1)`.
pub fn fit_gamma(m1: f64, var: f64, eta: f64) -> Result<GammaFit> {
    check_eta(eta)?;
    if !m1.is_finite() || !var.is_finite() {
        return Err(domain!("moments must be finite, got M1 = {m1}, Var = {var}"));
    }
    if !(m1 > 0.0) || !(var > 0.0) {
        return Err(Error::Degenerate(alloc::format!(
            "no Gamma fit for M1 = {m1}, Var = {var}; the channel is deterministic"
        )));
    }
    Ok(GammaFit {
        shape: m1 * m1 / var,
        scale: var / m1,
        mean: m1,
        variance: var,
        second_moment: var + m1 * m1,
        eta,
    })
}

/// Gamma fit from the uncorrelated moments at the reference port.
pub fn fit_uncorrelated(clusters: &[ClusterParams], geom: &FasGeometry, eta: f64) -> Result<GammaFit> {
    let port = geom.reference_port();
    fit_gamma(first_moment(clusters, port)?, variance_uncorrelated(clusters, port)?, eta)
}

/// Gamma fit from the correlation-corrected moments at the reference port.
pub fn fit_corrected(clusters: &[ClusterParams], geom: &FasGeometry, eta: f64) -> Result<GammaFit> {
    let port = geom.reference_port();
    fit_gamma(first_moment(clusters, port)?, variance_corrected(clusters, geom, eta)?, eta)
}

/// Kolmogorov-Smirnov distance between `samples` and a continuous CDF.
pub fn ks_distance<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(domain!("KS distance of an empty sample"));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(domain!("KS distance: sample contains NaN"));
    }
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// KS distance between the fitted Gamma CDF and the empirical CDF.
pub fn fit_quality(fit: &GammaFit, samples: &[f64]) -> Result<f64> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(domain!(
            "fit_quality needs at least {MIN_KS_SAMPLES} samples, got {}",
            samples.len()
        ));
    }
    ks_distance(samples, |x| fit.cdf(x))
}

/// KS distance of the Gaussian with the given mean and variance.
pub fn gaussian_quality(mean: f64, var: f64, samples: &[f64]) -> Result<f64> {
    if !(var > 0.0) {
        return Err(domain!("Gaussian fit needs a positive variance, got {var}"));
    }
    let sd = var.sqrt();
    ks_distance(samples, |x| normal_cdf((x - mean) / sd))
}

/// Sample mean and unbiased variance.
pub fn sample_moments(samples: &[f64]) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(domain!("need at least two samples for moments"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    Ok((mean, var))
}
