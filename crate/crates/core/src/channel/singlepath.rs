//! Single line-of-sight path with a shared-component port correlation model.
//!
//! Port gains are `g_k = sqrt(K/(K+1)) alpha_k + sqrt(1/(K+1)) [sqrt(1-mu^2)
//! (x_k + j y_k) + mu (x_0 + j y_0)]` with every `x`, `y` drawn from
//! `N(0, 1/2)`, so `E|g_k|^2 = |alpha_k|^2 K/(K+1) + 1/(K+1)` and ports share
//! the common term `x_0 + j y_0` with weight `mu`.

use super::scenario::rician_split;
use super::{ChannelRealization, FasGeometry};
use crate::error::{domain, Error, Result};
use crate::rng::standard_normal;
use crate::specfun::{bessel_j0_integral, bessel_j1_over_x, hyp1f2};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use num_complex::Complex64;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;
use rand_core::RngCore;

/// Port correlation coefficient of the single-path model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortCorrelation {
    /// Value used downstream, clamped to `[-1, 1]`.
    pub mu: f64,
    /// Value before clamping.
    pub raw: f64,
    pub clamped: bool,
}

/// `mu(W) = sqrt(2) sqrt(1F2(1/2; 1, 3/2; -pi^2 W^2)) - J1(2 pi W) / (2 pi W)`.
///
/// The hypergeometric term is summed directly while the series is well
/// conditioned. For larger apertures, where the alternating series cancels
/// badly, it is evaluated through `1F2(1/2; 1, 3/2; -x^2/4) = (1/x) int_0^x J0`.
pub fn singlepath_mu(w: f64) -> Result<PortCorrelation> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(domain!("singlepath_mu: aperture must be finite and >= 0, got {w}"));
    }
    let x = 2.0 * PI * w;
    let f = if w == 0.0 {
        1.0
    } else {
        match hyp1f2(0.5, 1.0, 1.5, -PI * PI * w * w) {
            Ok(v) => v,
            Err(Error::Range(_)) => bessel_j0_integral(x)? / x,
            Err(e) => return Err(e),
        }
    };
    if f < 0.0 {
        return Err(Error::Range(alloc::format!(
            "singlepath_mu: hypergeometric factor {f} is negative at W = {w}"
        )));
    }
    let raw = SQRT_2 * f.sqrt() - bessel_j1_over_x(x)?;
    let mu = raw.clamp(-1.0, 1.0);
    Ok(PortCorrelation { mu, raw, clamped: mu != raw })
}

/// Parameters of the single-path port model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SinglePathParams {
    /// Compact path gain `|beta(tau, nu)|`.
    pub beta: f64,
    pub rician_k: f64,
    /// Port correlation `mu`.
    pub port_mu: f64,
    /// Specular component `alpha_k` at each port.
    pub specular_per_port: Vec<Complex64>,
}

impl SinglePathParams {
    /// Parameters for `geom` with `mu` from the aperture. The specular term
    /// is a plane wave arriving at `arrival_angle`; `None` gives
    /// `alpha_k = 1` on every port.
    pub fn for_geometry(
        geom: &FasGeometry,
        beta: f64,
        rician_k: f64,
        arrival_angle: Option<f64>,
    ) -> Result<Self> {
        geom.validate()?;
        let mu = singlepath_mu(geom.aperture_wavelengths)?.mu;
        let cos_theta = arrival_angle.map_or(0.0, |t| t.cos());
        let specular_per_port = (0..geom.num_ports)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * geom.port_position(k) * cos_theta))
            .collect();
        let sp = SinglePathParams { beta, rician_k, port_mu: mu, specular_per_port };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(domain!("beta must be finite and > 0, got {}", self.beta));
        }
        if !(self.rician_k >= 0.0) {
            return Err(domain!("rician_k must be >= 0, got {}", self.rician_k));
        }
        if !(self.port_mu.abs() <= 1.0) {
            return Err(domain!("port_mu must lie in [-1, 1], got {}", self.port_mu));
        }
        if self.specular_per_port.is_empty() {
            return Err(domain!("single-path model needs at least one port"));
        }
        if self.specular_per_port.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(domain!("specular components must be finite"));
        }
        Ok(())
    }

    pub fn num_ports(&self) -> usize {
        self.specular_per_port.len()
    }
}

/// Draws one realization `h_k = beta g_k`.
pub fn realize_singlepath<R: RngCore + ?Sized>(sp: &SinglePathParams, rng: &mut R) -> Result<ChannelRealization> {
    sp.validate()?;
    let mut gains = vec![Complex64::new(0.0, 0.0); sp.num_ports()];
    realize_singlepath_into(sp, rng, &mut gains);
    Ok(ChannelRealization::from_gains(gains, None))
}

/// Allocation-free core of [`realize_singlepath`]. Draws `x_0, y_0` first,
/// then `x_k, y_k` port by port.
pub fn realize_singlepath_into<R: RngCore + ?Sized>(sp: &SinglePathParams, rng: &mut R, gains: &mut [Complex64]) {
    let (spec, diffuse_power) = rician_split(sp.rician_k);
    let diffuse = diffuse_power.sqrt();
    let mu = sp.port_mu;
    let own = (1.0 - mu * mu).max(0.0).sqrt();
    let common = Complex64::new(standard_normal(rng), standard_normal(rng)) * FRAC_1_SQRT_2;
    for (g, alpha) in gains.iter_mut().zip(&sp.specular_per_port) {
        let local = Complex64::new(standard_normal(rng), standard_normal(rng)) * FRAC_1_SQRT_2;
        *g = (alpha * spec + (local * own + common * mu) * diffuse) * sp.beta;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;

    #[test]
    fn mu_reference_values() {
        // 50-digit references
        let cases = [
            (0.0, core::f64::consts::SQRT_2 - 0.5),
            (0.001, 0.914_213_703_5),
            (0.5, 0.835_612_466_1),
            (1.0, 0.525_382_614_7),
            (2.0, 0.376_643_995_0),
            (5.0, 0.242_192_120_1),
            (10.0, 0.173_008_137_6),
        ];
        for (w, expect) in cases {
            let m = singlepath_mu(w).unwrap();
            assert!((m.mu - expect).abs() < 1e-10, "W={w}: {} vs {expect}", m.mu);
            assert!(!m.clamped);
        }
        assert!(singlepath_mu(-1.0).is_err());
    }

    #[test]
    fn mu_routes_agree() {
        for &w in &[0.1, 0.3, 0.6, 1.0, 1.4] {
            let x = 2.0 * PI * w;
            let series = hyp1f2(0.5, 1.0, 1.5, -PI * PI * w * w).unwrap();
            let integral = bessel_j0_integral(x).unwrap() / x;
            assert!((series - integral).abs() < 1e-12, "W={w}");
        }
    }

    #[test]
    fn mu_continuous() {
        let mut prev = singlepath_mu(0.0).unwrap().mu;
        for i in 1..=5000 {
            let m = singlepath_mu(i as f64 * 1e-3).unwrap().mu;
            assert!((m - prev).abs() <= 1e-3, "jump at W={}", i as f64 * 1e-3);
            prev = m;
        }
    }

    #[test]
    fn deterministic_limit() {
        let geom = FasGeometry::new(3, 1.0).unwrap();
        let sp = SinglePathParams::for_geometry(&geom, 2.0, f64::INFINITY, None).unwrap();
        let h = realize_singlepath(&sp, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
        for p in &h.per_port_power {
            assert!((p - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn unit_mean_power_and_shared_correlation() {
        let geom = FasGeometry::new(2, 1.0).unwrap();
        let mut sp = SinglePathParams::for_geometry(&geom, 1.0, 0.0, None).unwrap();
        sp.port_mu = 0.6;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let (mut p0, mut cross) = (0.0, Complex64::new(0.0, 0.0));
        for _ in 0..n {
            let h = realize_singlepath(&sp, &mut rng).unwrap();
            p0 += h.per_port_power[0];
            cross += h.per_port_gain[0] * h.per_port_gain[1].conj();
        }
        assert!((p0 / n as f64 - 1.0).abs() < 0.02);
        assert!((cross.re / n as f64 - 0.36).abs() < 0.02);
    }
}
