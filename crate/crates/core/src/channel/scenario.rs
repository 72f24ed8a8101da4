//! Multi-cluster delay-Doppler scenario and correlated port gains.

use super::{ChannelRealization, FasGeometry, PsdFactor};
use crate::error::{domain, Error, Result};
use crate::rng::{exponential, standard_normal, uniform};
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI};
use num_complex::Complex64;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;
use rand_core::RngCore;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Propagation scenario for one satellite-to-user link.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub sat_user_distance_m: f64,
    pub sat_velocity_mps: [f64; 3],
    /// Unit vector from the user towards the satellite.
    pub user_to_sat_unit: [f64; 3],
    pub num_clusters: usize,
    /// Rate of the exponential excess delay, 1/s.
    pub excess_delay_rate: f64,
    /// Half-width of the uniform Doppler offset, Hz.
    pub doppler_spread_hz: f64,
    /// Power attenuation of each cluster; the first is the line of sight.
    pub cluster_attenuations: Vec<f64>,
    /// Rician factor of the line-of-sight cluster.
    pub rician_k: f64,
    /// Rician factor of the scattered clusters (index >= 1). Zero makes them
    /// purely diffuse.
    pub scatter_rician_k: f64,
    /// Arrival angle of each cluster's specular component, radians. Empty
    /// means pi/2 for every cluster, which puts the same phase on every port.
    pub arrival_angles: Vec<f64>,
    /// Rescale the attenuations to unit total mean power.
    pub normalize_power: bool,
}

impl Default for ScenarioConfig {
    /// Ku-band LEO downlink: 12 GHz, 600 km slant range, three clusters
    /// with halving power, a K = 5 line of sight over diffuse scattering,
    /// unit total mean power.
    fn default() -> Self {
        ScenarioConfig {
            carrier_hz: 12e9,
            sat_user_distance_m: 600e3,
            sat_velocity_mps: [7_560.0, 0.0, 0.0],
            user_to_sat_unit: [0.5, 0.0, 0.866_025_403_784_438_6],
            num_clusters: 3,
            excess_delay_rate: 1e6,
            doppler_spread_hz: 1e3,
            cluster_attenuations: vec![1.0, 0.5, 0.25],
            rician_k: 5.0,
            scatter_rician_k: 0.0,
            arrival_angles: Vec::new(),
            normalize_power: true,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let norm = self.user_to_sat_unit.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(domain!("user_to_sat_unit must have unit norm, got {norm}"));
        }
        if self.num_clusters == 0 {
            return Err(domain!("num_clusters must be >= 1"));
        }
        if self.cluster_attenuations.len() != self.num_clusters {
            return Err(Error::Dimension {
                expected: self.num_clusters,
                found: self.cluster_attenuations.len(),
            });
        }
        if !self.arrival_angles.is_empty() && self.arrival_angles.len() != self.num_clusters {
            return Err(Error::Dimension {
                expected: self.num_clusters,
                found: self.arrival_angles.len(),
            });
        }
        if self.cluster_attenuations.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(domain!("cluster attenuations must be finite and > 0"));
        }
        for k in [self.rician_k, self.scatter_rician_k] {
            if !(k >= 0.0) {
                return Err(domain!("Rician factors must be >= 0, got {k}"));
            }
        }
        if !(self.excess_delay_rate > 0.0) || !self.excess_delay_rate.is_finite() {
            return Err(domain!("excess_delay_rate must be finite and > 0"));
        }
        if !(self.doppler_spread_hz >= 0.0) || !self.doppler_spread_hz.is_finite() {
            return Err(domain!("doppler_spread_hz must be finite and >= 0"));
        }
        let finite = [self.carrier_hz, self.sat_user_distance_m]
            .iter()
            .chain(&self.sat_velocity_mps)
            .all(|v| v.is_finite());
        if !finite || !(self.carrier_hz > 0.0) || !(self.sat_user_distance_m >= 0.0) {
            return Err(domain!("carrier, distance and velocity must be finite, carrier > 0"));
        }
        Ok(())
    }

    /// Line-of-sight delay `d / c`.
    pub fn los_delay_s(&self) -> f64 {
        self.sat_user_distance_m / SPEED_OF_LIGHT
    }

    /// Line-of-sight Doppler `(f_c / c) v . r`.
    pub fn los_doppler_hz(&self) -> f64 {
        let dot: f64 = self
            .sat_velocity_mps
            .iter()
            .zip(&self.user_to_sat_unit)
            .map(|(v, r)| v * r)
            .sum();
        self.carrier_hz / SPEED_OF_LIGHT * dot
    }

    /// Attenuations after optional power normalization.
    pub fn attenuations(&self) -> Vec<f64> {
        if self.normalize_power {
            let total: f64 = self.cluster_attenuations.iter().sum();
            self.cluster_attenuations.iter().map(|b| b / total).collect()
        } else {
            self.cluster_attenuations.clone()
        }
    }
}

/// One Rician cluster as seen across the ports.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ClusterParams {
    /// Real tap magnitude `sqrt(beta_p)`.
    pub tap_gain: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
    /// Specular mean at each port; carries the cluster phase.
    pub specular_means: Vec<Complex64>,
    /// Port-uniform variance of the diffuse part.
    pub diffuse_variance: f64,
}

impl ClusterParams {
    /// Mean power `alpha^2 (|mu_k|^2 + sigma^2)` contributed at port `k`.
    pub fn mean_power(&self, k: usize) -> f64 {
        self.tap_gain * self.tap_gain * (self.specular_means[k].norm_sqr() + self.diffuse_variance)
    }
}

/// `(sqrt(K / (K + 1)), 1 / (K + 1))`, with `K = inf` allowed.
pub(crate) fn rician_split(k: f64) -> (f64, f64) {
    if k.is_infinite() {
        (1.0, 0.0)
    } else {
        ((k / (k + 1.0)).sqrt(), 1.0 / (k + 1.0))
    }
}

/// Draws the cluster list for `geom`.
///
/// Random draws happen in a fixed order that does not depend on the number
/// of ports: the line-of-sight phase, then for each further cluster its
/// excess delay, Doppler offset and phase.
pub fn generate_scenario<R: RngCore + ?Sized>(
    cfg: &ScenarioConfig,
    geom: &FasGeometry,
    rng: &mut R,
) -> Result<Vec<ClusterParams>> {
    cfg.validate()?;
    geom.validate()?;
    let betas = cfg.attenuations();
    let tau_los = cfg.los_delay_s();
    let nu_los = cfg.los_doppler_hz();
    let mut clusters = Vec::with_capacity(cfg.num_clusters);
    for (p, &beta) in betas.iter().enumerate() {
        let (delay, doppler) = if p == 0 {
            (tau_los, nu_los)
        } else {
            let dt = exponential(rng, cfg.excess_delay_rate);
            let dv = (2.0 * uniform(rng) - 1.0) * cfg.doppler_spread_hz;
            (tau_los + dt, nu_los + dv)
        };
        let phase = 2.0 * PI * uniform(rng);
        let (spec, diffuse) = rician_split(if p == 0 { cfg.rician_k } else { cfg.scatter_rician_k });
        let cos_theta = cfg.arrival_angles.get(p).map_or(0.0, |t| t.cos());
        let specular_means = (0..geom.num_ports)
            .map(|k| {
                let ramp = 2.0 * PI * geom.port_position(k) * cos_theta;
                Complex64::from_polar(spec, phase + ramp)
            })
            .collect();
        clusters.push(ClusterParams {
            tap_gain: beta.sqrt(),
            delay_s: delay,
            doppler_hz: doppler,
            specular_means,
            diffuse_variance: diffuse,
        });
    }
    Ok(clusters)
}

/// Draws `h_k = sum_p alpha_p (mu_{p,k} + sigma_p (L z_p)_k)` with `z_p`
/// i.i.d. standard complex Gaussian.
pub fn realize_channel<R: RngCore + ?Sized>(
    clusters: &[ClusterParams],
    factor: &PsdFactor,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let n = factor.dim();
    let mut gains = vec![Complex64::new(0.0, 0.0); n];
    let mut z = vec![Complex64::new(0.0, 0.0); n];
    realize_channel_into(clusters, factor, rng, &mut z, &mut gains)?;
    let tap = clusters
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.mean_power(0).total_cmp(&b.1.mean_power(0)).then(b.0.cmp(&a.0)))
        .map(|(_, c)| (c.delay_s, c.doppler_hz));
    Ok(ChannelRealization::from_gains(gains, tap))
}

/// Allocation-free core of [`realize_channel`]; `z` is scratch space.
pub fn realize_channel_into<R: RngCore + ?Sized>(
    clusters: &[ClusterParams],
    factor: &PsdFactor,
    rng: &mut R,
    z: &mut [Complex64],
    gains: &mut [Complex64],
) -> Result<()> {
    let n = factor.dim();
    if gains.len() != n || z.len() != n {
        return Err(Error::Dimension { expected: n, found: gains.len().min(z.len()) });
    }
    for c in clusters {
        if c.specular_means.len() != n {
            return Err(Error::Dimension { expected: n, found: c.specular_means.len() });
        }
    }
    gains.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
    for c in clusters {
        for zk in z.iter_mut() {
            let re = standard_normal(rng);
            let im = standard_normal(rng);
            *zk = Complex64::new(re, im) * FRAC_1_SQRT_2;
        }
        let sigma = c.diffuse_variance.sqrt();
        for (k, g) in gains.iter_mut().enumerate() {
            let row = factor.row(k);
            let mut diffuse = Complex64::new(0.0, 0.0);
            for (l, zl) in row.iter().zip(z.iter()) {
                diffuse += zl * *l;
            }
            *g += (c.specular_means[k] + diffuse * sigma) * c.tap_gain;
        }
    }
    Ok(())
}
