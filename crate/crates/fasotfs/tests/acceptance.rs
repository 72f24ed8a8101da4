//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs the experiment configs in `configs/` through the sweep, fit-check
//! and report code, then reruns every one of them on a different worker
//! count and compares the CSV bytes.
//!
//! Criteria listed in `KNOWN_FAILURES` still print FAIL; they do not make
//! the target exit non-zero. Any other failure does.

use fasotfs::config::ExperimentConfig;
use fasotfs::fitcheck::{fit_check, write_fit_check};
use fasotfs::report::{evaluate_files, Report};
use fasotfs::sweep::{run_sweep, write_sweep};
use fasotfs_core::analysis_general::{capacity_bounds, capacity_exact, DEFAULT_CAPACITY_LIMIT};
use fasotfs_core::analysis_singlepath::{calibrate_prefactor, CapacityPrefactor};
use fasotfs_core::channel::{FasGeometry, SinglePathParams};
use fasotfs_core::gamma_fit::{fit_gamma, DEFAULT_ETA};
use fasotfs_core::specfun::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

/// Criteria expected to fail, with the reason.
const KNOWN_FAILURES: &[(usize, &str)] = &[
    (
        3,
        "at eta = 0.5 the capped correlation term inflates the variance by 1.5x while the \
         single-port law keeps the uncorrelated variance; corrected KS is about 0.07",
    ),
    (
        4,
        "the Gamma single-port CDF misses the Rician-like marginal by ~0.015 at the threshold, \
         far beyond 3 MC standard errors at 1e6 trials, so N = 1 (and N = 3) leave the envelope",
    ),
];

/// e E1(1) / ln 2, from mpmath at 30 digits.
const CAPACITY_EXP1_BITS: f64 = 0.860_347_382_270_886;
/// The numeral printed next to that closed form.
const CAPACITY_EXP1_PRINTED: f64 = 0.8589;

const SPECFUN_TOL: f64 = 1e-10;
const QUADRATURE_TOL: f64 = 1e-12;

struct Outcome {
    pass: bool,
    summary: String,
}

struct Suite {
    configs: PathBuf,
    out: PathBuf,
    /// Configs run so far and how: `true` for fit-check.
    runs: Vec<(PathBuf, bool)>,
}

impl Suite {
    fn config(&self, name: &str) -> PathBuf {
        self.configs.join(format!("{name}.json"))
    }

    fn sweep(&mut self, name: &str) -> PathBuf {
        let path = self.config(name);
        self.runs.push((path.clone(), false));
        run_config(&path, false, &self.out, Some(4))[0].clone()
    }

    fn fit_check(&mut self, name: &str) -> PathBuf {
        let path = self.config(name);
        self.runs.push((path.clone(), true));
        run_config(&path, true, &self.out, Some(4))[0].clone()
    }
}

/// Runs one config; returns the CSVs written.
fn run_config(path: &Path, fit: bool, out: &Path, threads: Option<usize>) -> Vec<PathBuf> {
    let cfg = ExperimentConfig::load(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    if fit {
        let r = fit_check(&cfg, threads).unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        let (ks, cdf) = write_fit_check(&r, &cfg, out).unwrap();
        vec![ks, cdf]
    } else {
        let r = run_sweep(&cfg, threads).unwrap_or_else(|e| panic!("{}: {e}", cfg.name));
        vec![write_sweep(&r, &cfg, out).unwrap()]
    }
}

fn report(paths: &[PathBuf]) -> Report {
    evaluate_files(paths).expect("report")
}

/// Every named check ran on the experiment and passed; lists the rest.
fn require(r: &Report, wanted: &[(&str, &str)]) -> (bool, Vec<String>) {
    let mut bad = Vec::new();
    for &(e, c) in wanted {
        let g = r.group(e, c);
        if g.is_empty() {
            bad.push(format!("{e}/{c} did not run"));
        }
        for x in g.iter().filter(|x| !x.passed()) {
            bad.push(format!("{e}/{c} at {}={}: {} (margin {:.2e})", x.param_name, x.point, x.detail, x.slack));
        }
    }
    (bad.is_empty(), bad)
}

fn outcome(pass: bool, ok: String, bad: Vec<String>) -> Outcome {
    let summary = if pass { ok } else { bad.join("; ") };
    Outcome { pass, summary }
}

fn specfun_eval(name: &str, x: &[f64]) -> f64 {
    let r = match name {
        "bessel_j0" => bessel_j0(x[0]),
        "bessel_j1" => bessel_j1(x[0]),
        "bessel_i0_scaled" => bessel_i0_scaled(x[0]),
        "reg_lower_gamma" => reg_lower_gamma(x[0], x[1]),
        "reg_upper_gamma" => reg_upper_gamma(x[0], x[1]),
        "marcum_q1" => marcum_q1(x[0], x[1]),
        "marcum_p1" => marcum_q1_tails(x[0], x[1]).map(|t| t.p),
        "hyp1f2" => hyp1f2(x[0], x[1], x[2], x[3]),
        other => panic!("unknown function {other}"),
    };
    r.unwrap_or(f64::NAN)
}

fn criterion_1(_: &mut Suite) -> Outcome {
    let table = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/data/specfun_vectors.txt");
    let text = std::fs::read_to_string(&table).expect("reference table");
    let mut worst = (0.0f64, String::new());
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let nums: Vec<f64> = fields[1..].iter().map(|s| s.parse().unwrap()).collect();
        let (args, tail) = nums.split_at(nums.len() - 2);
        let got = specfun_eval(fields[0], args);
        let rel = if tail[0] == 0.0 { got.abs() } else { ((got - tail[0]) / tail[0]).abs() };
        let rel = if rel.is_nan() { f64::INFINITY } else { rel };
        if rel > worst.0 || rows == 0 {
            worst = (rel, format!("{}{args:?}", fields[0]));
        }
        rows += 1;
    }

    // Exactness: Hermite with weight e^{-x^2} (int x^{2k} = Gamma(k + 1/2)),
    // Laguerre with weight e^{-t} (int t^p = p!), Legendre on [-1, 1].
    let mut quad_worst = 0.0f64;
    for m in [5usize, 10, 20] {
        let rule = gauss_hermite_rule(m).unwrap();
        let mut moment = std::f64::consts::PI.sqrt();
        for p in (0..2 * m).step_by(2) {
            let got = rule.integrate(|x| x.powi(p as i32));
            quad_worst = quad_worst.max(((got - moment) / moment).abs());
            moment *= (p as f64 + 1.0) / 2.0;
        }
    }
    for l in [4usize, 8, 16, 40] {
        let rule = gauss_laguerre_rule(l).unwrap();
        let mut fact = 1.0;
        for p in 0..(2 * l).min(24) {
            if p > 0 {
                fact *= p as f64;
            }
            let got = rule.integrate(|t| t.powi(p as i32));
            quad_worst = quad_worst.max(((got - fact) / fact).abs());
        }
    }
    for n in [7usize, 12] {
        let rule = gauss_legendre_rule(n).unwrap();
        for p in 0..2 * n {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            quad_worst = quad_worst.max((rule.integrate(|x| x.powi(p as i32)) - exact).abs());
        }
    }
    let pass = rows > 400 && worst.0 <= SPECFUN_TOL && quad_worst <= QUADRATURE_TOL;
    Outcome {
        pass,
        summary: format!(
            "{rows} reference values, worst rel {:.1e} ({}); quadrature exactness worst {:.1e}",
            worst.0, worst.1, quad_worst
        ),
    }
}

fn criterion_2(s: &mut Suite) -> Outcome {
    let ks = s.fit_check("gamma_fit");
    let r = report(&[ks]);
    let (pass, bad) = require(&r, &[("gamma_fit", "ks_gamma"), ("gamma_fit", "gamma_beats_gaussian")]);
    let detail: Vec<String> = r
        .group("gamma_fit", "gamma_beats_gaussian")
        .iter()
        .map(|c| format!("P={}: {}", c.point, c.detail))
        .collect();
    outcome(pass, detail.join(", "), bad)
}

fn criterion_3(s: &mut Suite) -> Outcome {
    let ks = s.fit_check("corrected_fit");
    let r = report(&[ks]);
    let (pass, mut bad) = require(
        &r,
        &[("corrected_fit", "ks_corrected_vs_uncapped"), ("corrected_fit", "ks_corrected")],
    );
    let detail = r.group("corrected_fit", "ks_corrected_vs_uncapped")[0].detail.clone();
    if !pass {
        bad.push(detail.clone());
    }
    outcome(pass, detail, bad)
}

fn criterion_4(s: &mut Suite) -> Outcome {
    let n = s.sweep("envelope_ports");
    let w = s.sweep("envelope_aperture");
    let r = report(&[n, w]);
    let (pass, bad) = require(
        &r,
        &[
            ("envelope_ports", "envelope_sandwich"),
            ("envelope_ports", "mc_monotone"),
            ("envelope_aperture", "envelope_sandwich"),
            ("envelope_aperture", "mc_monotone"),
        ],
    );
    outcome(pass, "MC inside [F^N - 3se, F + 3se] and nonincreasing for N = 1..10 and W = 0.25..4".into(), bad)
}

fn criterion_5(s: &mut Suite) -> Outcome {
    let p = s.sweep("subsets");
    let r = report(&[p]);
    let (single, mut bad) = require(&r, &[("subsets", "subsets_single_port")]);
    let notes = r.group("subsets", "subsets_minus_mc");
    let reported: Vec<f64> = notes.iter().map(|c| c.point).collect();
    let complete = [2.0, 4.0, 8.0].iter().all(|n| reported.contains(n));
    if !complete {
        bad.push(format!("deviation reported only at N = {reported:?}"));
    }
    let dev: Vec<String> = notes.iter().filter(|c| c.point > 1.0).map(|c| format!("N={}: {}", c.point, c.detail)).collect();
    outcome(single && complete, format!("N=1 exact; deviation from MC {}", dev.join(", ")), bad)
}

fn criterion_6(s: &mut Suite) -> Outcome {
    let p = s.sweep("capacity_ports");
    let r = report(&[p]);
    let (mut pass, mut bad) =
        require(&r, &[("capacity_ports", "capacity_order"), ("capacity_ports", "capacity_upper_monotone")]);
    let fit = fit_gamma(1.0, 1.0, DEFAULT_ETA).unwrap();
    let (lo, hi) = capacity_bounds(&fit, 1).unwrap();
    let direct = capacity_exact(|g| -(-g).exp_m1(), DEFAULT_CAPACITY_LIMIT).unwrap();
    let worst = [lo.value, hi.value, direct.value]
        .iter()
        .map(|v| (v - CAPACITY_EXP1_BITS).abs())
        .fold(0.0, f64::max);
    if worst > 1e-4 {
        pass = false;
        bad.push(format!("exponential capacity off by {worst:.1e}"));
    }
    outcome(
        pass,
        format!(
            "bounds ordered, upper nondecreasing in N; alpha=theta=1 capacity {:.6} vs e E1(1)/ln2 = {:.6} \
             (|diff| {worst:.1e}; the printed {CAPACITY_EXP1_PRINTED} differs from the closed form by {:.1e})",
            lo.value,
            CAPACITY_EXP1_BITS,
            (CAPACITY_EXP1_BITS - CAPACITY_EXP1_PRINTED).abs()
        ),
        bad,
    )
}

fn criterion_7(s: &mut Suite) -> Outcome {
    let names = ["sp_outage_ports", "sp_outage_aperture", "sp_outage_threshold", "sp_quadrature"];
    let paths: Vec<PathBuf> = names.iter().map(|n| s.sweep(n)).collect();
    let r = report(&paths);
    let mut wanted = Vec::new();
    for n in &names[..3] {
        wanted.push((*n, "sp_exact_vs_mc"));
        wanted.push((*n, "sp_quad_vs_exact"));
    }
    wanted.push(("sp_quadrature", "sp_quad_vs_exact"));
    wanted.push(("sp_quadrature", "sp_quad_error_monotone"));
    let (pass, bad) = require(&r, &wanted);
    let worst = paths_worst(&r, "sp_exact_vs_mc");
    outcome(pass, format!("exact vs MC worst slack {worst:.1e}; M=20 within 1e-3; error shrinks with M"), bad)
}

fn paths_worst(r: &Report, check: &str) -> f64 {
    r.checks.iter().filter(|c| c.check == check).map(|c| c.slack).fold(f64::INFINITY, f64::min)
}

fn criterion_8(s: &mut Suite) -> Outcome {
    let paths = vec![s.sweep("sp_capacity_ports"), s.sweep("sp_capacity_aperture")];
    let r = report(&paths);
    let (mut pass, mut bad) = require(
        &r,
        &[
            ("sp_capacity_ports", "sp_capacity_vs_mc"),
            ("sp_capacity_ports", "sp_cap_quad_vs_exact"),
            ("sp_capacity_aperture", "sp_capacity_vs_mc"),
            ("sp_capacity_aperture", "sp_cap_quad_vs_exact"),
        ],
    );
    // The sweeps use the configured prefactor; check it is the one the
    // data picks.
    let geom = FasGeometry::new(4, 1.0).unwrap();
    let sp = SinglePathParams::for_geometry(&geom, 1.0, 5.0, None).unwrap();
    let cal = calibrate_prefactor(&sp, 20, 40, 1e-7).unwrap();
    let configured = ExperimentConfig::load(&s.config("sp_capacity_ports")).unwrap().quadrature.prefactor;
    if cal.matched != configured || cal.matched != CapacityPrefactor::Normalized {
        pass = false;
        bad.push(format!("calibration picked {} (fitted {:.5})", cal.matched.label(), cal.fitted));
    }
    outcome(
        pass,
        format!(
            "exact vs MC worst slack {:.1e} bits, quadrature vs exact worst slack {:.1e}; calibrated prefactor {} (fitted {:.5})",
            paths_worst(&r, "sp_capacity_vs_mc"),
            paths_worst(&r, "sp_cap_quad_vs_exact"),
            cal.matched.label(),
            cal.fitted
        ),
        bad,
    )
}

fn criterion_9(s: &mut Suite) -> Outcome {
    let paths = vec![s.sweep("mrc_general"), s.sweep("mrc_singlepath")];
    let r = report(&paths);
    let (pass, bad) = require(&r, &[("mrc_general", "mc_below_mrc"), ("mrc_singlepath", "mc_below_mrc")]);
    let g = r.group("mrc_general", "mc_below_mrc").len();
    let sp = r.group("mrc_singlepath", "mc_below_mrc").len();
    outcome(pass, format!("FAS below MRC N_r=4 at {g} and N_r=6 at {sp} mid-range thresholds"), bad)
}

fn criterion_10(s: &mut Suite) -> Outcome {
    let rerun = s.out.join("rerun");
    let mut files = 0;
    let mut bad = Vec::new();
    for (path, fit) in &s.runs {
        for second in run_config(path, *fit, &rerun, Some(1)) {
            let first = s.out.join(second.file_name().unwrap());
            files += 1;
            if std::fs::read(&first).unwrap() != std::fs::read(&second).unwrap() {
                bad.push(format!("{} differs", first.display()));
            }
        }
    }
    let pass = bad.is_empty() && files > 0;
    outcome(pass, format!("{files} CSVs byte-identical on rerun (4 workers, then 1)"), bad)
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let mut suite = Suite {
        configs: Path::new(env!("CARGO_MANIFEST_DIR")).join("configs"),
        out: dir.path().to_path_buf(),
        runs: Vec::new(),
    };
    type Criterion = fn(&mut Suite) -> Outcome;
    let criteria: [(usize, &str, f64, Criterion); 10] = [
        (1, "special functions and quadrature", 10.0, criterion_1),
        (2, "Gamma characterization", 60.0, criterion_2),
        (3, "correlation-corrected fit", 60.0, criterion_3),
        (4, "general-model envelope", 300.0, criterion_4),
        (5, "subset expansion", f64::INFINITY, criterion_5),
        (6, "capacity bounds", 120.0, criterion_6),
        (7, "single-path outage", 600.0, criterion_7),
        (8, "single-path capacity", 600.0, criterion_8),
        (9, "MRC benchmark", 300.0, criterion_9),
        (10, "reproducibility", f64::INFINITY, criterion_10),
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (k, name, budget, run) in criteria {
        let t = Instant::now();
        let mut o = run(&mut suite);
        let secs = t.elapsed().as_secs_f64();
        if secs > budget {
            o.pass = false;
            o.summary = format!("over the {budget} s budget; {}", o.summary);
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {k:>2} {name:<34} {verdict}  ({secs:.1} s) {}", o.summary);
        if o.pass {
            passed += 1;
        } else if let Some((_, why)) = KNOWN_FAILURES.iter().find(|(c, _)| *c == k) {
            println!("             known failure: {why}");
        } else {
            unexpected.push(k);
        }
    }
    println!("{passed}/10 criteria pass");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
