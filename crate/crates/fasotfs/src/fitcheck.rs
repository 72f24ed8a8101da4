//! Gamma and Gaussian fits against simulated power samples.

use crate::config::{ExperimentConfig, FitStatistic, ModelKind, Point, VarianceModel};
use crate::csvio::{self, header_bytes, Row, Table};
use crate::error::{Error, Result};
use crate::parallel::with_threads;
use crate::sweep::{base_metadata, fit_for, general_setup, run_mc};
use fasotfs_core::gamma_fit::{fit_quality, gaussian_quality, sample_moments, variance_uncorrelated, GammaFit};
use fasotfs_core::montecarlo::Statistic;
use fasotfs_core::specfun::normal_cdf;
use rayon::prelude::*;
use std::path::{Path, PathBuf};

/// Methods of the KS table, in row order.
pub const KS_METHODS: [&str; 6] = [
    "ks_gamma_uncorrelated",
    "ks_gamma_corrected",
    "ks_gamma_uncapped",
    "ks_gaussian",
    "alpha_fit",
    "alpha_moments",
];

/// Distances and CDF tables at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct FitPoint {
    pub value: f64,
    pub uncorrelated: GammaFit,
    pub corrected: GammaFit,
    pub uncapped: GammaFit,
    /// Moment-matched Gaussian `(mean, variance)`.
    pub gaussian: (f64, f64),
    pub ks_uncorrelated: f64,
    pub ks_corrected: f64,
    pub ks_uncapped: f64,
    pub ks_gaussian: f64,
    /// `mean^2 / var` of the samples.
    pub alpha_moments: f64,
    /// Rows `(x, empirical, gamma_uncorrelated, gamma_corrected, gamma_uncapped, gaussian)`.
    pub cdf: Vec<[f64; 6]>,
}

#[derive(Debug, Clone)]
pub struct FitCheckResult {
    /// KS distances and shapes in the sweep row layout.
    pub ks: Table,
    pub cdf_metadata: Vec<(String, String)>,
    pub points: Vec<FitPoint>,
}

fn check_point(cfg: &ExperimentConfig, p: &Point) -> Result<FitPoint> {
    let s = general_setup(cfg, p)?;
    let statistic = match cfg.fit_check.statistic {
        FitStatistic::Port => Statistic::PortPower(s.geom.reference_port()),
        FitStatistic::Max => Statistic::MaxPower,
    };
    let uncorrelated = fit_for(&s, VarianceModel::Uncorrelated, cfg.eta)?;
    let corrected = fit_for(&s, VarianceModel::Corrected, cfg.eta)?;
    let uncapped = fit_for(&s, VarianceModel::Uncapped, cfg.eta)?;
    let var = variance_uncorrelated(&s.clusters, s.geom.reference_port())?;
    let gaussian = (uncorrelated.mean, var);
    let mut samples = run_mc(cfg, p, statistic)?.samples;
    let ks_uncorrelated = fit_quality(&uncorrelated, &samples)?;
    let ks_corrected = fit_quality(&corrected, &samples)?;
    let ks_uncapped = fit_quality(&uncapped, &samples)?;
    let ks_gaussian = gaussian_quality(gaussian.0, gaussian.1, &samples)?;
    let (m, v) = sample_moments(&samples)?;
    if v.is_nan() || v <= 0.0 {
        return Err(Error::Core(fasotfs_core::Error::Degenerate(format!(
            "sample variance {v} at grid point {}",
            p.value
        ))));
    }
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    let top = samples[((n as f64 * 0.999) as usize).min(n - 1)];
    let sd = gaussian.1.sqrt();
    let k = cfg.fit_check.cdf_points;
    let cdf = (0..k)
        .map(|i| {
            let x = top * i as f64 / (k - 1) as f64;
            [
                x,
                samples.partition_point(|&s| s <= x) as f64 / n as f64,
                uncorrelated.cdf(x),
                corrected.cdf(x),
                uncapped.cdf(x),
                normal_cdf((x - gaussian.0) / sd),
            ]
        })
        .collect();
    Ok(FitPoint {
        value: p.value,
        uncorrelated,
        corrected,
        uncapped,
        gaussian,
        ks_uncorrelated,
        ks_corrected,
        ks_uncapped,
        ks_gaussian,
        alpha_moments: m * m / v,
        cdf,
    })
}

/// Fits at every grid point of a general-model config.
pub fn fit_check(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<FitCheckResult> {
    cfg.validate()?;
    if cfg.model != ModelKind::General {
        return Err(Error::Config("fit-check needs model general".into()));
    }
    let points = cfg.points()?;
    let fits: Vec<FitPoint> =
        with_threads(threads, || points.par_iter().map(|p| check_point(cfg, p)).collect::<Result<_>>())??;
    let mut ks = base_metadata(cfg, "fit-check");
    ks.push_meta(
        "statistic",
        match cfg.fit_check.statistic {
            FitStatistic::Port => "power at the reference port",
            FitStatistic::Max => "best-port power",
        },
    );
    ks.push_meta("gaussian", "mean and variance of the uncorrelated Gamma fit");
    for f in &fits {
        let vals = [
            f.ks_uncorrelated,
            f.ks_corrected,
            f.ks_uncapped,
            f.ks_gaussian,
            f.uncorrelated.shape,
            f.alpha_moments,
        ];
        for (method, v) in KS_METHODS.iter().zip(vals) {
            ks.rows.push(Row {
                param_name: cfg.sweep_param.name().into(),
                param_value: f.value,
                method: (*method).into(),
                value: v,
                error_estimate: 0.0,
                seed: cfg.seed,
            });
        }
    }
    let cdf_metadata = ks.metadata.clone();
    Ok(FitCheckResult { ks, cdf_metadata, points: fits })
}

fn cdf_bytes(cfg: &ExperimentConfig, r: &FitCheckResult) -> Result<Vec<u8>> {
    let mut out = header_bytes(&r.cdf_metadata);
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record([
            "param_name",
            "param_value",
            "x",
            "empirical",
            "gamma_uncorrelated",
            "gamma_corrected",
            "gamma_uncapped",
            "gaussian",
        ])?;
        for f in &r.points {
            for row in &f.cdf {
                let mut rec = vec![cfg.sweep_param.name().to_string(), f.value.to_string()];
                rec.extend(row.iter().map(|v| format!("{v:e}")));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::Io { path: "<buffer>".into(), source: e })?;
    }
    Ok(out)
}

/// Writes `<name>_ks.csv` and `<name>_cdf.csv`.
pub fn write_fit_check(r: &FitCheckResult, cfg: &ExperimentConfig, out_dir: &Path) -> Result<(PathBuf, PathBuf)> {
    let ks = out_dir.join(format!("{}_ks.csv", cfg.name));
    let cdf = out_dir.join(format!("{}_cdf.csv", cfg.name));
    csvio::write_table(&ks, &r.ks)?;
    csvio::write_atomic(&cdf, &cdf_bytes(cfg, r)?)?;
    Ok((ks, cdf))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"name": "f", "model": "general", "sweep_param": "P", "sweep_grid": [1, 3],
                "methods": ["mc"], "trials": 20000, "geometry": {{"num_ports": 8, "aperture_wavelengths": 1.0}}{extra}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn rayleigh_shape_from_moments() {
        let c = cfg(r#", "scenario": {"rician_k": 0.0}"#);
        let r = fit_check(&c, None).unwrap();
        let p1 = &r.points[0];
        assert!((p1.uncorrelated.shape - 1.0).abs() < 1e-12);
        assert!((p1.alpha_moments - 1.0).abs() < 0.02 * 1.0 + 0.02, "{}", p1.alpha_moments);
        assert_eq!(r.ks.rows.len(), 12);
    }

    #[test]
    fn gamma_beats_gaussian() {
        let r = fit_check(&cfg(""), None).unwrap();
        for p in &r.points {
            assert!(p.ks_uncorrelated < p.ks_gaussian, "{p:?}");
            assert!(p.ks_corrected <= p.ks_uncapped);
            let last = p.cdf.last().unwrap();
            assert!(last[1] > 0.99 && p.cdf[0][0] == 0.0);
        }
    }

    #[test]
    fn singlepath_rejected() {
        let mut c = cfg("");
        c.model = ModelKind::Singlepath;
        c.sweep_param = crate::config::SweepParam::NumPorts;
        assert!(fit_check(&c, None).is_err());
    }
}
