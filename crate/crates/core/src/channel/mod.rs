//! Channel construction: port geometry and correlation, the multi-cluster
//! delay-Doppler scenario, and the single-path Rician port model.

mod psd;
mod scenario;
mod singlepath;

pub use psd::{psd_factor, ClipReport, PsdFactor};
pub use scenario::{
    generate_scenario, realize_channel, realize_channel_into, ClusterParams, ScenarioConfig,
    SPEED_OF_LIGHT,
};
pub(crate) use scenario::rician_split;
pub use singlepath::{
    realize_singlepath, realize_singlepath_into, singlepath_mu, PortCorrelation, SinglePathParams,
};

use crate::error::{domain, Result};
use crate::specfun::bessel_j0;
use alloc::vec::Vec;
use num_complex::Complex64;

/// A fluid antenna with `num_ports` equally spaced ports over
/// `aperture_wavelengths` wavelengths.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FasGeometry {
    pub num_ports: usize,
    pub aperture_wavelengths: f64,
}

impl FasGeometry {
    pub fn new(num_ports: usize, aperture_wavelengths: f64) -> Result<Self> {
        let g = FasGeometry { num_ports, aperture_wavelengths };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_ports == 0 {
            return Err(domain!("geometry needs at least one port"));
        }
        if !(self.aperture_wavelengths >= 0.0) || !self.aperture_wavelengths.is_finite() {
            return Err(domain!(
                "aperture must be finite and >= 0 wavelengths, got {}",
                self.aperture_wavelengths
            ));
        }
        Ok(())
    }

    /// Position of port `k` (zero-based) in wavelengths from the first port.
    pub fn port_position(&self, k: usize) -> f64 {
        if self.num_ports == 1 {
            0.0
        } else {
            k as f64 * self.aperture_wavelengths / (self.num_ports - 1) as f64
        }
    }

    /// Reference port for per-port moments: the centre port, `ceil(N/2)` in
    /// one-based numbering.
    pub fn reference_port(&self) -> usize {
        self.num_ports.div_ceil(2) - 1
    }
}

/// The port correlation matrix `R[k][l] = J0(2 pi |k - l| W / (N - 1))`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    n: usize,
    /// Row-major entries.
    entries: Vec<f64>,
}

/// Builds the port correlation matrix for `geom`.
pub fn correlation_matrix(geom: &FasGeometry) -> Result<CorrelationMatrix> {
    geom.validate()?;
    let n = geom.num_ports;
    // Toeplitz: one kernel value per lag.
    let lags: Vec<f64> = (0..n)
        .map(|d| bessel_j0(2.0 * core::f64::consts::PI * geom.port_position(d)))
        .collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(lags[i.abs_diff(j)]);
        }
    }
    Ok(CorrelationMatrix { n, entries })
}

impl CorrelationMatrix {
    /// Wraps an explicit symmetric matrix given row-major.
    pub fn from_entries(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(crate::Error::Dimension { expected: n * n, found: entries.len() });
        }
        for i in 0..n {
            for j in 0..i {
                if entries[i * n + j] != entries[j * n + i] {
                    return Err(domain!("correlation matrix is not symmetric at ({i}, {j})"));
                }
            }
        }
        Ok(CorrelationMatrix { n, entries })
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut entries = alloc::vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        CorrelationMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Mean off-diagonal correlation with each entry clamped to `[0, 1]`;
    /// 1 for a single port.
    pub fn rho_avg(&self) -> f64 {
        let n = self.n;
        if n < 2 {
            return 1.0;
        }
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += self.get(i, j).clamp(0.0, 1.0);
                }
            }
        }
        sum / (n * (n - 1)) as f64
    }

    /// `sum_{i != j} R[i][j]`.
    pub fn off_diagonal_sum(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    sum += self.get(i, j);
                }
            }
        }
        sum
    }

    /// Principal submatrix on the given (sorted, distinct) indices.
    pub fn principal_submatrix(&self, idx: &[usize]) -> Vec<f64> {
        let mut out = Vec::with_capacity(idx.len() * idx.len());
        for &i in idx {
            for &j in idx {
                out.push(self.get(i, j));
            }
        }
        out
    }
}

/// One draw of the per-port channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub per_port_gain: Vec<Complex64>,
    pub per_port_power: Vec<f64>,
    /// `(delay_s, doppler_hz)` of the strongest cluster, when the model has
    /// delay-Doppler taps.
    pub tap: Option<(f64, f64)>,
}

impl ChannelRealization {
    pub(crate) fn from_gains(per_port_gain: Vec<Complex64>, tap: Option<(f64, f64)>) -> Self {
        let per_port_power = per_port_gain.iter().map(|h| h.norm_sqr()).collect();
        ChannelRealization { per_port_gain, per_port_power, tap }
    }

    /// Largest per-port power, the SNR at the selected port.
    pub fn max_power(&self) -> f64 {
        self.per_port_power.iter().copied().fold(0.0, f64::max)
    }
}
