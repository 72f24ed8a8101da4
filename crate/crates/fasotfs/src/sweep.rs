//! Parameter sweeps.

use crate::config::{ExperimentConfig, ModelKind, Point, VarianceModel};
use crate::csvio::{self, Row, Table, DIGEST_KEY, EXPERIMENT_KEY};
use crate::error::Result;
use crate::methods::Method;
use crate::parallel::{simulate_parallel, with_threads};
use fasotfs_core::analysis_general::{
    capacity_bounds, capacity_exact, effective_ports, mrc_matched_es_n0, mrc_outage, outage_asymptotic,
    outage_envelope, outage_exact_subsets, single_port_cdf, Regime, DEFAULT_CAPACITY_LIMIT, SUBSET_PORT_CAP,
};
use fasotfs_core::analysis_singlepath::{
    capacity_exact_numeric, capacity_quadrature, outage_exact_numeric, outage_quadrature,
};
use fasotfs_core::channel::{
    correlation_matrix, generate_scenario, psd_factor, ClusterParams, CorrelationMatrix, FasGeometry,
};
use fasotfs_core::gamma_fit::{
    first_moment, fit_corrected, fit_gamma, fit_uncorrelated, variance_uncapped, GammaFit,
};
use fasotfs_core::integrate::Estimate;
use fasotfs_core::montecarlo::{
    empirical_metrics, scenario_rng, GeneralSampler, SimulationRun, SinglePathSampler, Statistic,
};
use log::{info, warn};
use rayon::prelude::*;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Geometry-dependent inputs shared by grid points: ports, aperture bits,
/// clusters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Key(usize, u64, usize);

fn key(p: &Point) -> Key {
    Key(p.geometry.num_ports, p.geometry.aperture_wavelengths.to_bits(), p.clusters)
}

/// Rows plus what does not go into the CSV.
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub table: Table,
    /// Seconds spent on each row, aligned with `table.rows`.
    pub wall_times: Vec<f64>,
    /// Monte-Carlo runs by geometry label, for sample dumps.
    pub runs: Vec<(String, SimulationRun)>,
}

impl SweepResult {
    pub fn csv_path(&self, out_dir: &Path, name: &str) -> PathBuf {
        out_dir.join(format!("{name}.csv"))
    }
}

pub(crate) fn point_label(p: &Point) -> String {
    format!("N{}_W{}_P{}", p.geometry.num_ports, p.geometry.aperture_wavelengths, p.clusters)
}

/// Channel of the general model at one grid point.
pub(crate) struct GeneralSetup {
    pub clusters: Vec<ClusterParams>,
    pub r: CorrelationMatrix,
    pub geom: FasGeometry,
}

pub(crate) fn general_setup(cfg: &ExperimentConfig, p: &Point) -> Result<GeneralSetup> {
    let geom = p.geometry;
    let clusters = generate_scenario(&cfg.scenario_for(p), &geom, &mut scenario_rng(cfg.seed))?;
    let r = correlation_matrix(&geom)?;
    Ok(GeneralSetup { clusters, r, geom })
}

pub(crate) fn fit_for(s: &GeneralSetup, variance: VarianceModel, eta: f64) -> Result<GammaFit> {
    Ok(match variance {
        VarianceModel::Uncorrelated => fit_uncorrelated(&s.clusters, &s.geom, eta)?,
        VarianceModel::Corrected => fit_corrected(&s.clusters, &s.geom, eta)?,
        VarianceModel::Uncapped => {
            let m1 = first_moment(&s.clusters, s.geom.reference_port())?;
            fit_gamma(m1, variance_uncapped(&s.clusters, &s.geom)?, eta)?
        }
    })
}

pub(crate) fn run_mc(cfg: &ExperimentConfig, p: &Point, statistic: Statistic) -> Result<SimulationRun> {
    match cfg.model {
        ModelKind::General => {
            let s = general_setup(cfg, p)?;
            let factor = psd_factor(&s.r)?;
            let sampler = GeneralSampler::new(s.clusters, s.geom, factor, statistic)?;
            Ok(simulate_parallel(&sampler, cfg.trials, cfg.seed)?)
        }
        ModelKind::Singlepath => {
            let sp = cfg.singlepath.params(&p.geometry)?;
            let sampler = SinglePathSampler::new(sp, statistic)?;
            Ok(simulate_parallel(&sampler, cfg.trials, cfg.seed)?)
        }
    }
}

/// Evaluates once per distinct geometry, in parallel, keeping first-seen
/// order.
fn per_geometry<V: Send>(
    points: &[Point],
    wanted: impl Fn(&Point) -> bool + Sync,
    f: impl Fn(&Point) -> Result<V> + Sync,
) -> Result<Vec<(Key, V)>> {
    let mut firsts: Vec<&Point> = Vec::new();
    for p in points.iter().filter(|p| wanted(p)) {
        if !firsts.iter().any(|q| key(q) == key(p)) {
            firsts.push(p);
        }
    }
    firsts.par_iter().map(|p| Ok((key(p), f(p)?))).collect()
}

fn lookup<'a, V>(cache: &'a [(Key, V)], p: &Point) -> &'a V {
    &cache.iter().find(|(k, _)| *k == key(p)).expect("precomputed for every point").1
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    mc: Vec<(Key, SimulationRun)>,
    sp_capacity: Vec<(Key, Estimate)>,
}

fn value(v: f64) -> (f64, f64) {
    (v, 0.0)
}

fn estimate(e: Estimate) -> (f64, f64) {
    (e.value, e.error)
}

impl Context<'_> {
    fn mc_outage(&self, p: &Point) -> Result<(f64, f64)> {
        let m = empirical_metrics(&lookup(&self.mc, p).samples, p.gamma())?;
        Ok((m.outage, m.stderr_outage))
    }

    fn mc_capacity(&self, p: &Point) -> Result<(f64, f64)> {
        let m = empirical_metrics(&lookup(&self.mc, p).samples, p.gamma())?;
        Ok((m.capacity_bits, m.stderr_capacity))
    }

    fn mrc(&self, n_rx: usize, mean_snr: f64, p: &Point) -> Result<(f64, f64)> {
        let rate = p.gamma().ln_1p() / std::f64::consts::LN_2;
        Ok(value(mrc_outage(n_rx, mrc_matched_es_n0(n_rx, mean_snr), rate)?))
    }

    fn general(&self, p: &Point, methods: &[Method]) -> Result<(Vec<(f64, f64)>, String)> {
        let cfg = self.cfg;
        let s = general_setup(cfg, p)?;
        let fit = fit_for(&s, cfg.variance, cfg.eta)?;
        let n = s.geom.num_ports;
        let gamma = p.gamma();
        let rho = s.r.rho_avg();
        let env = outage_envelope(&fit, gamma, n, rho)?;
        let mut bounds = None;
        let mut out = Vec::with_capacity(methods.len());
        for &m in methods {
            let v = match m {
                Method::ExactSubsets if n <= SUBSET_PORT_CAP => value(outage_exact_subsets(&s.r, &fit, gamma)?),
                Method::ExactSubsets => {
                    warn!("{}: N = {n} exceeds the subset cap {SUBSET_PORT_CAP}; exact_subsets takes the Monte-Carlo value", point_label(p));
                    self.mc_outage(p)?
                }
                Method::EnvelopeIndep => value(env.independent_endpoint),
                Method::EnvelopeComono => value(env.comonotone_endpoint),
                Method::RefinedNeff => value(env.refined_lower),
                Method::AsymptoticSmall => value(outage_asymptotic(&fit, gamma, Regime::Small)?.value),
                Method::AsymptoticLarge => value(outage_asymptotic(&fit, gamma, Regime::Large)?.value),
                Method::CapacityExact => {
                    let n_eff = effective_ports(n, rho);
                    estimate(capacity_exact(|g| single_port_cdf(&fit, g).powf(n_eff), DEFAULT_CAPACITY_LIMIT)?)
                }
                Method::CapacityLower | Method::CapacityUpper => {
                    if bounds.is_none() {
                        bounds = Some(capacity_bounds(&fit, n)?);
                    }
                    let (lo, hi) = bounds.expect("just set");
                    estimate(if m == Method::CapacityLower { lo } else { hi })
                }
                Method::Mrc(n_rx) => self.mrc(n_rx, fit.mean, p)?,
                Method::Mc => self.mc_outage(p)?,
                Method::McCapacity => self.mc_capacity(p)?,
                _ => unreachable!("method list validated against the model"),
            };
            out.push(v);
        }
        let note = format!(
            "N={n} W={} P={} gamma={gamma:e} rho_avg={rho:e} n_eff={:e} alpha={:e} theta={:e}",
            s.geom.aperture_wavelengths, p.clusters, env.n_eff, fit.shape, fit.scale
        );
        Ok((out, note))
    }

    fn singlepath(&self, p: &Point, methods: &[Method]) -> Result<(Vec<(f64, f64)>, String)> {
        let cfg = self.cfg;
        let q = &cfg.quadrature;
        let sp = cfg.singlepath.params(&p.geometry)?;
        let amplitude = p.gamma().sqrt();
        let mut out = Vec::with_capacity(methods.len());
        for &m in methods {
            let v = match m {
                Method::SpExact => estimate(outage_exact_numeric(&sp, amplitude, q.outage_tol)?),
                Method::SpQuad(order) => value(outage_quadrature(&sp, amplitude, order.unwrap_or(p.hermite))?),
                Method::SpCapExact => estimate(*lookup(&self.sp_capacity, p)),
                Method::SpCapQuad(orders) => {
                    let (mm, ll) = orders.unwrap_or((p.hermite, q.laguerre));
                    value(capacity_quadrature(&sp, mm, ll, q.prefactor)?)
                }
                Method::Mrc(n_rx) => self.mrc(n_rx, sp.beta * sp.beta, p)?,
                Method::Mc => self.mc_outage(p)?,
                Method::McCapacity => self.mc_capacity(p)?,
                _ => unreachable!("method list validated against the model"),
            };
            out.push(v);
        }
        let note = format!(
            "N={} W={} gamma={:e} mu={:e} M={}",
            p.geometry.num_ports,
            p.geometry.aperture_wavelengths,
            p.gamma(),
            sp.port_mu,
            p.hermite
        );
        Ok((out, note))
    }
}

/// Metadata common to sweep and fit-check outputs.
pub(crate) fn base_metadata(cfg: &ExperimentConfig, kind: &str) -> Table {
    let mut t = Table::default();
    t.push_meta("fasotfs", format!("{} {kind}", env!("CARGO_PKG_VERSION")));
    t.push_meta(EXPERIMENT_KEY, &cfg.name);
    t.push_meta(DIGEST_KEY, cfg.digest());
    t.push_meta("model", format!("{:?}", cfg.model).to_lowercase());
    t.push_meta("sweep_param", cfg.sweep_param.name());
    t.push_meta("seed", cfg.seed);
    t.push_meta("trials", cfg.trials);
    t.push_meta("eta", cfg.eta);
    t.push_meta("aperture_wavelengths", cfg.geometry.aperture_wavelengths);
    t.push_meta("num_ports", cfg.geometry.num_ports);
    t.push_meta(
        "threshold",
        format!(
            "snr_threshold_db -> linear 10^(dB/10) -> normalized by N0/(P G) = {:e}",
            cfg.budget.noise_psd / (cfg.budget.tx_power_w * cfg.budget.combined_gain)
        ),
    );
    t
}

/// Evaluates every method at every grid point. Rows are ordered by grid
/// index, then by method.
pub fn run_sweep(cfg: &ExperimentConfig, threads: Option<usize>) -> Result<SweepResult> {
    cfg.validate()?;
    with_threads(threads, || run_sweep_inner(cfg))?
}

fn run_sweep_inner(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let methods = cfg.methods()?;
    let points = cfg.points()?;
    let needs_mc = |p: &Point| {
        methods.iter().any(|m| m.needs_mc())
            || (methods.contains(&Method::ExactSubsets) && p.geometry.num_ports > SUBSET_PORT_CAP)
    };
    let started = Instant::now();
    let mc = per_geometry(&points, needs_mc, |p| {
        let t = Instant::now();
        let run = run_mc(cfg, p, Statistic::MaxPower)?;
        info!("{}: {} trials in {:.1} s", point_label(p), cfg.trials, t.elapsed().as_secs_f64());
        Ok(run)
    })?;
    let sp_capacity = per_geometry(
        &points,
        |_| methods.contains(&Method::SpCapExact),
        |p| {
            let sp = cfg.singlepath.params(&p.geometry)?;
            Ok(capacity_exact_numeric(&sp, cfg.quadrature.capacity_tol)?)
        },
    )?;
    let ctx = Context { cfg, mc, sp_capacity };
    // Per point: (value, error) per method, metadata note, wall time.
    type Evaluated = (Vec<(f64, f64)>, String, f64);
    let evaluated: Vec<Evaluated> = points
        .par_iter()
        .map(|p| {
            let t = Instant::now();
            let (vals, note) = match cfg.model {
                ModelKind::General => ctx.general(p, &methods)?,
                ModelKind::Singlepath => ctx.singlepath(p, &methods)?,
            };
            Ok((vals, note, t.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    let mut table = base_metadata(cfg, "sweep");
    table.push_meta("variance", format!("{:?}", cfg.variance).to_lowercase());
    if cfg.model == ModelKind::Singlepath {
        table.push_meta("capacity_prefactor", cfg.quadrature.prefactor.label());
        table.push_meta("singlepath_threshold", "outage compares |h|^2 with the normalized threshold");
    } else {
        table.push_meta("rho_avg", "mean of off-diagonal R entries, each clamped to [0, 1]");
    }
    let mut wall_times = Vec::new();
    for (p, (vals, note, secs)) in points.iter().zip(&evaluated) {
        table.push_meta(format!("point.{}", p.index), note);
        for (&m, &(v, e)) in methods.iter().zip(vals) {
            table.rows.push(Row {
                param_name: cfg.sweep_param.name().into(),
                param_value: p.value,
                method: m.label(p.hermite, cfg.quadrature.laguerre),
                value: v,
                error_estimate: e,
                seed: cfg.seed,
            });
            // Per-point time split evenly; methods share setup work.
            wall_times.push(secs / methods.len() as f64);
        }
    }
    info!("{}: {} rows in {:.1} s", cfg.name, table.rows.len(), started.elapsed().as_secs_f64());
    let runs = points
        .iter()
        .filter_map(|p| ctx.mc.iter().find(|(k, _)| *k == key(p)).map(|(_, r)| (point_label(p), r)))
        .fold(Vec::<(String, SimulationRun)>::new(), |mut acc, (l, r)| {
            if !acc.iter().any(|(x, _)| *x == l) {
                acc.push((l, r.clone()));
            }
            acc
        });
    Ok(SweepResult { table, wall_times, runs })
}

/// Writes `<out_dir>/<name>.csv`.
pub fn write_sweep(result: &SweepResult, cfg: &ExperimentConfig, out_dir: &Path) -> Result<PathBuf> {
    let path = result.csv_path(out_dir, &cfg.name);
    csvio::write_table(&path, &result.table)?;
    Ok(path)
}
