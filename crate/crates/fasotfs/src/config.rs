//! Experiment configuration files.
//!
//! A config is a JSON object; every field except `name`, `model`,
//! `sweep_param`, `sweep_grid` and `methods` has a default. See
//! `configs/` for complete examples.

use crate::error::{io_err, Error, Result};
use crate::methods::{self, Method};
use fasotfs_core::analysis_general::{normalize_threshold, LinkBudget};
use fasotfs_core::analysis_singlepath::{CapacityPrefactor, DEFAULT_HERMITE_ORDER, DEFAULT_LAGUERRE_ORDER, DEFAULT_TOL};
use fasotfs_core::channel::{FasGeometry, ScenarioConfig, SinglePathParams};
use fasotfs_core::gamma_fit::{DEFAULT_ETA, ETA_RANGE};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    General,
    Singlepath,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "N")]
    NumPorts,
    #[serde(rename = "W")]
    Aperture,
    #[serde(rename = "snr_threshold_db")]
    SnrThresholdDb,
    #[serde(rename = "quadrature_M")]
    QuadratureM,
    /// Number of clusters; only meaningful for `fit-check`.
    #[serde(rename = "P")]
    Clusters,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::NumPorts => "N",
            SweepParam::Aperture => "W",
            SweepParam::SnrThresholdDb => "snr_threshold_db",
            SweepParam::QuadratureM => "quadrature_M",
            SweepParam::Clusters => "P",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepParam::NumPorts | SweepParam::QuadratureM | SweepParam::Clusters)
    }
}

/// Which variance feeds the Gamma fit of the general model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceModel {
    Uncorrelated,
    Corrected,
    Uncapped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub num_ports: usize,
    pub aperture_wavelengths: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig { num_ports: 8, aperture_wavelengths: 1.0 }
    }
}

/// Link budget with the SNR threshold in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BudgetConfig {
    pub tx_power_w: f64,
    pub combined_gain: f64,
    pub noise_psd: f64,
    pub snr_threshold_db: f64,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        BudgetConfig { tx_power_w: 1.0, combined_gain: 1.0, noise_psd: 1.0, snr_threshold_db: -5.0 }
    }
}

impl BudgetConfig {
    pub fn link_budget(&self, snr_threshold_db: f64) -> Result<LinkBudget> {
        let linear = 10f64.powf(snr_threshold_db / 10.0);
        Ok(normalize_threshold(self.tx_power_w, self.combined_gain, self.noise_psd, linear)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinglePathConfig {
    pub beta: f64,
    pub rician_k: f64,
    /// Arrival angle of the specular term in radians; absent means the same
    /// specular phase on every port.
    pub arrival_angle: Option<f64>,
}

impl Default for SinglePathConfig {
    fn default() -> Self {
        SinglePathConfig { beta: 1.0, rician_k: 5.0, arrival_angle: None }
    }
}

impl SinglePathConfig {
    pub fn params(&self, geom: &FasGeometry) -> Result<SinglePathParams> {
        Ok(SinglePathParams::for_geometry(geom, self.beta, self.rician_k, self.arrival_angle)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    /// Gauss-Hermite order per dimension.
    pub hermite: usize,
    /// Gauss-Laguerre order of the capacity sum.
    pub laguerre: usize,
    /// Absolute tolerance of the adaptive outage integral.
    pub outage_tol: f64,
    /// Absolute tolerance (bits) of the adaptive capacity integral.
    pub capacity_tol: f64,
    pub prefactor: CapacityPrefactor,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            hermite: DEFAULT_HERMITE_ORDER,
            laguerre: DEFAULT_LAGUERRE_ORDER,
            outage_tol: DEFAULT_TOL,
            capacity_tol: 1e-6,
            prefactor: CapacityPrefactor::Normalized,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitStatistic {
    /// Power at the reference port.
    Port,
    /// Best-port power.
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitCheckConfig {
    pub statistic: FitStatistic,
    /// Abscissae in the CDF table.
    pub cdf_points: usize,
}

impl Default for FitCheckConfig {
    fn default() -> Self {
        FitCheckConfig { statistic: FitStatistic::Port, cdf_points: 101 }
    }
}

fn default_trials() -> usize {
    100_000
}

fn default_seed() -> u64 {
    1
}

fn default_eta() -> f64 {
    DEFAULT_ETA
}

fn default_variance() -> VarianceModel {
    VarianceModel::Uncorrelated
}

fn default_mrc() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix of the output files.
    pub name: String,
    pub model: ModelKind,
    pub sweep_param: SweepParam,
    pub sweep_grid: Vec<f64>,
    pub methods: Vec<String>,
    #[serde(default)]
    pub scenario: ScenarioConfig,
    #[serde(default)]
    pub singlepath: SinglePathConfig,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub budget: BudgetConfig,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default = "default_variance")]
    pub variance: VarianceModel,
    /// Antennas of the bare `mrc` method.
    #[serde(default = "default_mrc")]
    pub mrc_antennas: usize,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub fit_check: FitCheckConfig,
}

/// Command-line values that replace config fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub eta: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Json(j) => Error::Config(format!("{}: {j}", path.display())),
            e => e,
        })
    }

    pub fn apply(&mut self, o: Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(t) = o.trials {
            self.trials = t;
        }
        if let Some(e) = o.eta {
            self.eta = e;
        }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Err(Error::Config(m));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return cfg_err(format!("name must be a non-empty file stem, got {:?}", self.name));
        }
        if self.sweep_grid.is_empty() {
            return cfg_err("sweep_grid is empty".into());
        }
        if self.sweep_grid.iter().any(|v| !v.is_finite()) {
            return cfg_err("sweep_grid values must be finite".into());
        }
        if self.sweep_grid.windows(2).any(|w| w[0] >= w[1]) {
            return cfg_err("sweep_grid must be strictly increasing".into());
        }
        if self.sweep_param.integral() && self.sweep_grid.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
            return cfg_err(format!("{} grid values must be positive integers", self.sweep_param.name()));
        }
        match (self.model, self.sweep_param) {
            (ModelKind::General, SweepParam::QuadratureM) => {
                return cfg_err("quadrature_M sweeps need model singlepath".into())
            }
            (ModelKind::Singlepath, SweepParam::Clusters) => {
                return cfg_err("P sweeps need model general".into())
            }
            _ => {}
        }
        if self.trials == 0 {
            return cfg_err("trials must be >= 1".into());
        }
        if !(self.eta >= ETA_RANGE.0 && self.eta <= ETA_RANGE.1) {
            return cfg_err(format!("eta must lie in [{}, {}], got {}", ETA_RANGE.0, ETA_RANGE.1, self.eta));
        }
        if self.mrc_antennas == 0 {
            return cfg_err("mrc_antennas must be >= 1".into());
        }
        if self.fit_check.cdf_points < 2 {
            return cfg_err("fit_check.cdf_points must be >= 2".into());
        }
        self.methods()?;
        for p in self.points()? {
            p.geometry.validate()?;
            match self.model {
                ModelKind::General => {
                    self.scenario_for(&p).validate()?;
                }
                ModelKind::Singlepath => {
                    self.singlepath.params(&p.geometry)?;
                }
            }
        }
        Ok(())
    }

    /// Parsed method list.
    pub fn methods(&self) -> Result<Vec<Method>> {
        methods::parse_all(&self.methods, self.model, self.mrc_antennas)
    }

    /// Settings at every grid point, in grid order.
    pub fn points(&self) -> Result<Vec<Point>> {
        self.sweep_grid
            .iter()
            .enumerate()
            .map(|(index, &v)| {
                let mut geometry = FasGeometry {
                    num_ports: self.geometry.num_ports,
                    aperture_wavelengths: self.geometry.aperture_wavelengths,
                };
                let mut snr_db = self.budget.snr_threshold_db;
                let mut hermite = self.quadrature.hermite;
                let mut clusters = self.scenario.num_clusters;
                match self.sweep_param {
                    SweepParam::NumPorts => geometry.num_ports = v as usize,
                    SweepParam::Aperture => geometry.aperture_wavelengths = v,
                    SweepParam::SnrThresholdDb => snr_db = v,
                    SweepParam::QuadratureM => hermite = v as usize,
                    SweepParam::Clusters => clusters = v as usize,
                }
                let budget = self.budget.link_budget(snr_db)?;
                Ok(Point { index, value: v, geometry, snr_db, budget, hermite, clusters })
            })
            .collect()
    }

    /// Scenario at `p`. When sweeping `P` the attenuation list is cut or
    /// extended by halving.
    pub fn scenario_for(&self, p: &Point) -> ScenarioConfig {
        let mut s = self.scenario.clone();
        if p.clusters != s.num_clusters {
            let mut att = s.cluster_attenuations.clone();
            att.truncate(p.clusters);
            while att.len() < p.clusters {
                att.push(att.last().map_or(1.0, |a| a * 0.5));
            }
            s.cluster_attenuations = att;
            s.arrival_angles.truncate(p.clusters);
            if s.arrival_angles.len() != p.clusters {
                s.arrival_angles.clear();
            }
            s.num_clusters = p.clusters;
        }
        s
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Resolved settings at one grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: usize,
    pub value: f64,
    pub geometry: FasGeometry,
    pub snr_db: f64,
    pub budget: LinkBudget,
    pub hermite: usize,
    pub clusters: usize,
}

impl Point {
    /// Normalized power threshold.
    pub fn gamma(&self) -> f64 {
        self.budget.normalized_threshold
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ExperimentConfig {
        ExperimentConfig::from_json(
            r#"{"name": "t", "model": "general", "sweep_param": "N",
                "sweep_grid": [1, 2, 4], "methods": ["envelope", "mc"]}"#,
        )
        .unwrap()
    }

    #[test]
    fn defaults_fill_in() {
        let c = base();
        c.validate().unwrap();
        assert_eq!(c.trials, 100_000);
        assert_eq!(c.eta, DEFAULT_ETA);
        assert_eq!(c.scenario, ScenarioConfig::default());
        assert_eq!(c.points().unwrap()[2].geometry.num_ports, 4);
    }

    #[test]
    fn rejects_bad_grids_and_methods() {
        let mut c = base();
        c.sweep_grid = vec![];
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.sweep_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        c.sweep_grid = vec![1.5];
        assert!(c.validate().is_err());
        let mut c = base();
        c.methods.clear();
        assert!(c.validate().is_err());
        c.methods = vec!["sp_exact".into()];
        let msg = c.validate().unwrap_err().to_string();
        assert!(msg.contains("envelope_indep"), "{msg}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let r = ExperimentConfig::from_json(
            r#"{"name": "t", "model": "general", "sweep_param": "N",
                "sweep_grid": [1], "methods": ["mc"], "trails": 5}"#,
        );
        assert!(r.is_err());
    }

    #[test]
    fn threshold_conversion() {
        let mut c = base();
        c.sweep_param = SweepParam::SnrThresholdDb;
        c.sweep_grid = vec![-10.0, 0.0, 10.0];
        let g: Vec<f64> = c.points().unwrap().iter().map(Point::gamma).collect();
        assert!((g[0] - 0.1).abs() < 1e-15 && g[1] == 1.0 && (g[2] - 10.0).abs() < 1e-14);
    }

    #[test]
    fn cluster_sweep_extends_attenuations() {
        let mut c = base();
        c.sweep_param = SweepParam::Clusters;
        c.sweep_grid = vec![1.0, 5.0];
        let pts = c.points().unwrap();
        assert_eq!(c.scenario_for(&pts[0]).cluster_attenuations, vec![1.0]);
        assert_eq!(c.scenario_for(&pts[1]).cluster_attenuations, vec![1.0, 0.5, 0.25, 0.125, 0.0625]);
        c.validate().unwrap();
    }

    #[test]
    fn digest_tracks_content() {
        let a = base();
        let mut b = base();
        assert_eq!(a.digest(), b.digest());
        b.apply(Overrides { seed: Some(9), ..Default::default() });
        assert_ne!(a.digest(), b.digest());
    }
}
