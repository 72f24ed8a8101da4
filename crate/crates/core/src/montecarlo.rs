//! Block-structured Monte-Carlo sampling of the best-port power.
//!
//! Trials are grouped into blocks of [`BLOCK_SIZE`]. Block `b` draws from a
//! ChaCha8 generator keyed by the run seed on stream `b`, so any block can
//! be produced independently and a run is the concatenation of its blocks
//! in index order regardless of how they were scheduled.

use crate::channel::{
    realize_channel_into, realize_singlepath_into, ClusterParams, FasGeometry, PsdFactor,
    SinglePathParams,
};
use crate::error::{domain, Error, Result};
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use sha2::{Digest, Sha256};

/// Trials per block.
pub const BLOCK_SIZE: usize = 4096;

/// Stream reserved for drawing the scenario itself.
pub const SCENARIO_STREAM: u64 = u64::MAX;

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Generator for the scenario draw of a run seeded with `seed`.
pub fn scenario_rng(seed: u64) -> ChaCha8Rng {
    block_rng(seed, SCENARIO_STREAM)
}

/// Number of blocks covering `trials`.
pub fn block_count(trials: usize) -> usize {
    trials.div_ceil(BLOCK_SIZE)
}

/// Trial index range `[start, end)` of block `block`.
pub fn block_range(block: usize, trials: usize) -> (usize, usize) {
    let start = block * BLOCK_SIZE;
    (start.min(trials), (start + BLOCK_SIZE).min(trials))
}

/// What each trial records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Statistic {
    /// `max_k |h_k|^2`.
    MaxPower,
    /// `|h_k|^2` at one port.
    PortPower(usize),
}

impl Statistic {
    #[inline]
    fn apply(self, gains: &[Complex64]) -> f64 {
        match self {
            Statistic::MaxPower => gains.iter().map(|h| h.norm_sqr()).fold(0.0, f64::max),
            Statistic::PortPower(k) => gains[k].norm_sqr(),
        }
    }

    fn check(self, ports: usize) -> Result<()> {
        match self {
            Statistic::PortPower(k) if k >= ports => Err(Error::Dimension { expected: k + 1, found: ports }),
            _ => Ok(()),
        }
    }

    fn tag(self) -> u64 {
        match self {
            Statistic::MaxPower => u64::MAX,
            Statistic::PortPower(k) => k as u64,
        }
    }
}

/// Anything that can fill one block of trials.
pub trait BlockSampler {
    /// Writes one statistic per trial of block `block` into `out`.
    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]);
    /// SHA-256 of every input that affects the samples (seed excluded).
    fn digest(&self) -> [u8; 32];
}

fn hash_f64s(h: &mut Sha256, xs: impl IntoIterator<Item = f64>) {
    for x in xs {
        h.update(x.to_bits().to_le_bytes());
    }
}

/// Sampler for the multi-cluster model.
#[derive(Debug, Clone)]
pub struct GeneralSampler {
    clusters: Vec<ClusterParams>,
    factor: PsdFactor,
    geom: FasGeometry,
    statistic: Statistic,
}

impl GeneralSampler {
    pub fn new(clusters: Vec<ClusterParams>, geom: FasGeometry, factor: PsdFactor, statistic: Statistic) -> Result<Self> {
        geom.validate()?;
        if factor.dim() != geom.num_ports {
            return Err(Error::Dimension { expected: geom.num_ports, found: factor.dim() });
        }
        if clusters.is_empty() {
            return Err(domain!("need at least one cluster"));
        }
        for c in &clusters {
            if c.specular_means.len() != geom.num_ports {
                return Err(Error::Dimension { expected: geom.num_ports, found: c.specular_means.len() });
            }
        }
        statistic.check(geom.num_ports)?;
        Ok(GeneralSampler { clusters, factor, geom, statistic })
    }

    pub fn clusters(&self) -> &[ClusterParams] {
        &self.clusters
    }

    pub fn factor(&self) -> &PsdFactor {
        &self.factor
    }
}

impl BlockSampler for GeneralSampler {
    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]) {
        let n = self.geom.num_ports;
        let mut rng = block_rng(seed, block);
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        let mut gains = vec![Complex64::new(0.0, 0.0); n];
        for o in out.iter_mut() {
            // Dimensions were checked in the constructor.
            let _ = realize_channel_into(&self.clusters, &self.factor, &mut rng, &mut z, &mut gains);
            *o = self.statistic.apply(&gains);
        }
    }

    fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"general\0");
        h.update((self.geom.num_ports as u64).to_le_bytes());
        hash_f64s(&mut h, [self.geom.aperture_wavelengths]);
        h.update(self.statistic.tag().to_le_bytes());
        for c in &self.clusters {
            hash_f64s(&mut h, [c.tap_gain, c.delay_s, c.doppler_hz, c.diffuse_variance]);
            hash_f64s(&mut h, c.specular_means.iter().flat_map(|m| [m.re, m.im]));
        }
        hash_f64s(&mut h, self.factor.target().iter().copied());
        h.finalize().into()
    }
}

/// Sampler for the single-path model.
#[derive(Debug, Clone)]
pub struct SinglePathSampler {
    sp: SinglePathParams,
    statistic: Statistic,
}

impl SinglePathSampler {
    pub fn new(sp: SinglePathParams, statistic: Statistic) -> Result<Self> {
        sp.validate()?;
        statistic.check(sp.num_ports())?;
        Ok(SinglePathSampler { sp, statistic })
    }
}

impl BlockSampler for SinglePathSampler {
    fn fill_block(&self, seed: u64, block: u64, out: &mut [f64]) {
        let mut rng = block_rng(seed, block);
        let mut gains = vec![Complex64::new(0.0, 0.0); self.sp.num_ports()];
        for o in out.iter_mut() {
            realize_singlepath_into(&self.sp, &mut rng, &mut gains);
            *o = self.statistic.apply(&gains);
        }
    }

    fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"singlepath\0");
        h.update((self.sp.num_ports() as u64).to_le_bytes());
        h.update(self.statistic.tag().to_le_bytes());
        hash_f64s(&mut h, [self.sp.beta, self.sp.rician_k, self.sp.port_mu]);
        hash_f64s(&mut h, self.sp.specular_per_port.iter().flat_map(|m| [m.re, m.im]));
        h.finalize().into()
    }
}

/// Samples of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationRun {
    pub seed: u64,
    pub trials: usize,
    pub samples: Vec<f64>,
    pub config_digest: [u8; 32],
}

/// Runs all blocks in order on the calling thread.
pub fn simulate<S: BlockSampler + ?Sized>(sampler: &S, trials: usize, seed: u64) -> Result<SimulationRun> {
    if trials == 0 {
        return Err(domain!("need at least one trial"));
    }
    let mut samples = vec![0.0; trials];
    for (b, chunk) in samples.chunks_mut(BLOCK_SIZE).enumerate() {
        sampler.fill_block(seed, b as u64, chunk);
    }
    Ok(SimulationRun { seed, trials, samples, config_digest: sampler.digest() })
}

/// Best-port power samples of the multi-cluster model.
pub fn simulate_general(
    clusters: &[ClusterParams],
    geom: &FasGeometry,
    factor: &PsdFactor,
    trials: usize,
    seed: u64,
) -> Result<SimulationRun> {
    let s = GeneralSampler::new(clusters.to_vec(), *geom, factor.clone(), Statistic::MaxPower)?;
    simulate(&s, trials, seed)
}

/// Best-port power samples of the single-path model.
pub fn simulate_singlepath(sp: &SinglePathParams, trials: usize, seed: u64) -> Result<SimulationRun> {
    simulate(&SinglePathSampler::new(sp.clone(), Statistic::MaxPower)?, trials, seed)
}

/// Outage, capacity and their standard errors from a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmpiricalMetrics {
    pub outage: f64,
    pub capacity_bits: f64,
    /// Binomial standard error, floored at `1 / trials` so that an
    /// observed outage of 0 or 1 still carries an uncertainty.
    pub stderr_outage: f64,
    pub stderr_capacity: f64,
}

/// Fraction of samples below `gamma` and mean `log2(1 + s)`.
pub fn empirical_metrics(samples: &[f64], gamma: f64) -> Result<EmpiricalMetrics> {
    if samples.is_empty() {
        return Err(domain!("no samples"));
    }
    let n = samples.len() as f64;
    let below = samples.iter().filter(|&&s| s < gamma).count() as f64;
    let outage = below / n;
    let logs = samples.iter().map(|&s| s.ln_1p() / core::f64::consts::LN_2);
    let (mut mean, mut m2) = (0.0, 0.0);
    for (i, x) in logs.enumerate() {
        let d = x - mean;
        mean += d / (i + 1) as f64;
        m2 += d * (x - mean);
    }
    let var = if samples.len() > 1 { m2 / (n - 1.0) } else { 0.0 };
    Ok(EmpiricalMetrics {
        outage,
        capacity_bits: mean,
        stderr_outage: (outage * (1.0 - outage) / n).sqrt().max(1.0 / n),
        stderr_capacity: (var / n).sqrt(),
    })
}

/// Empirical outage at each threshold of a sorted grid, from one sort.
pub fn empirical_outage_curve(samples: &[f64], thresholds: &[f64]) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(domain!("no samples"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(thresholds
        .iter()
        .map(|&g| sorted.partition_point(|&s| s < g) as f64 / n)
        .collect())
}
