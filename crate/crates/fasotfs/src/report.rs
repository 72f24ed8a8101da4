//! Pass/fail checks over sweep and fit-check CSVs.
//!
//! Checks are picked by the methods a file contains, so one report can mix
//! outputs of different experiments. Each check yields a slack per grid
//! point: non-negative passes.

use crate::csvio::{read_table, Row, Table, DIGEST_KEY, EXPERIMENT_KEY};
use crate::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::{Path, PathBuf};

/// Largest KS distance accepted for a Gamma fit.
pub const KS_LIMIT: f64 = 0.05;
/// Absolute floor of the single-path exact-vs-MC outage tolerance.
pub const SP_OUTAGE_FLOOR: f64 = 5e-3;
/// Gauss-Hermite order whose outage must match the adaptive value.
pub const SP_QUAD_REFERENCE_ORDER: usize = 20;
pub const SP_QUAD_TOL: f64 = 1e-3;
/// Capacity agreement, bits.
pub const SP_CAPACITY_TOL: f64 = 1e-2;
/// Largest aperture (wavelengths) where the capacity sum is held to
/// [`SP_CAPACITY_TOL`].
pub const SP_CAP_QUAD_MAX_W: f64 = 5.0;
/// MRC outage band where the MRC comparison applies.
pub const MRC_MID_RANGE: (f64, f64) = (1e-3, 1e-1);
/// Tolerance of `exact_subsets` against the single-port CDF at `N = 1`.
pub const SUBSET_N1_TOL: f64 = 1e-12;
/// Monte-Carlo standard errors allowed in statistical comparisons.
pub const SIGMAS: f64 = 3.0;

/// Outcome of one check at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub experiment: String,
    pub check: &'static str,
    pub param_name: String,
    pub point: f64,
    pub detail: String,
    /// Distance to the threshold; negative means violated.
    pub slack: f64,
    /// Informational rows never fail.
    pub informational: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.informational || self.slack >= 0.0
    }
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// All checks of one name and experiment.
    pub fn group(&self, experiment: &str, check: &str) -> Vec<&Check> {
        self.checks.iter().filter(|c| c.experiment == experiment && c.check == check).collect()
    }

    /// Whether `check` ran on `experiment` and every point passed.
    pub fn group_passed(&self, experiment: &str, check: &str) -> bool {
        let g = self.group(experiment, check);
        !g.is_empty() && g.iter().all(|c| c.passed())
    }

    /// One line per (experiment, check); violations listed below their
    /// line with grid point and margin.
    pub fn render(&self) -> String {
        let mut groups: Vec<(&str, &str)> = Vec::new();
        for c in &self.checks {
            if !groups.contains(&(c.experiment.as_str(), c.check)) {
                groups.push((c.experiment.as_str(), c.check));
            }
        }
        let mut out = String::new();
        let _ = writeln!(out, "{:<24} {:<28} {:>6} {:>13}  result", "experiment", "check", "points", "worst slack");
        for (e, k) in groups {
            let g = self.group(e, k);
            let worst = g.iter().map(|c| c.slack).fold(f64::INFINITY, f64::min);
            let result = if g.iter().all(|c| c.informational) {
                "INFO"
            } else if g.iter().all(|c| c.passed()) {
                "PASS"
            } else {
                "FAIL"
            };
            let _ = writeln!(out, "{e:<24} {k:<28} {:>6} {worst:>13.3e}  {result}", g.len());
            for c in g.iter().filter(|c| !c.passed() || c.informational) {
                let tag = if c.informational { "note" } else { "violation" };
                let _ = writeln!(
                    out,
                    "    {tag} at {}={}: {} (margin {:.3e})",
                    c.param_name, c.point, c.detail, c.slack
                );
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        let _ = writeln!(
            out,
            "{} checks, {} failed: {}",
            self.checks.len(),
            failed,
            if failed == 0 { "PASS" } else { "FAIL" }
        );
        out
    }
}

/// `(param_value, value, error)` of one method, in file order.
fn series(t: &Table, method: &str) -> Vec<(f64, f64, f64)> {
    t.method(method).map(|r| (r.param_value, r.value, r.error_estimate)).collect()
}

fn at(s: &[(f64, f64, f64)], x: f64) -> Option<(f64, f64)> {
    s.iter().find(|p| p.0 == x).map(|p| (p.1, p.2))
}

struct Ctx<'a> {
    experiment: &'a str,
    param: &'a str,
    out: &'a mut Vec<Check>,
}

impl Ctx<'_> {
    fn push(&mut self, check: &'static str, point: f64, slack: f64, detail: String) {
        self.out.push(Check {
            experiment: self.experiment.to_string(),
            check,
            param_name: self.param.to_string(),
            point,
            detail,
            slack,
            informational: false,
        });
    }

    fn note(&mut self, check: &'static str, point: f64, detail: String) {
        self.push(check, point, 0.0, detail);
        self.out.last_mut().expect("just pushed").informational = true;
    }
}

fn table_checks(t: &Table, cx: &mut Ctx) {
    let mc = series(t, "mc");
    let methods: Vec<&str> = {
        let mut m: Vec<&str> = Vec::new();
        for r in &t.rows {
            if !m.contains(&r.method.as_str()) {
                m.push(&r.method);
            }
        }
        m
    };
    let has = |m: &str| methods.contains(&m);

    for r in &t.rows {
        let probability = r.method == "mc"
            || r.method.starts_with("envelope_")
            || r.method == "refined_neff"
            || r.method == "sp_exact"
            || r.method.starts_with("sp_quad_M")
            || r.method.starts_with("mrc");
        if probability {
            let slack = r.value.min(1.0 - r.value);
            cx.push("outage_in_unit_interval", r.param_value, slack, format!("{} = {:e}", r.method, r.value));
        }
    }

    if has("mc") && has("envelope_indep") && has("envelope_comono") {
        let (lo, hi) = (series(t, "envelope_indep"), series(t, "envelope_comono"));
        for &(x, v, s) in &mc {
            let (Some((l, _)), Some((h, _))) = (at(&lo, x), at(&hi, x)) else { continue };
            let slack = (v - (l - SIGMAS * s)).min(h + SIGMAS * s - v);
            cx.push("envelope_sandwich", x, slack, format!("mc {v:.4e} (se {s:.1e}) vs [{l:.4e}, {h:.4e}]"));
        }
    }

    if has("mc") && matches!(cx.param, "N" | "W") {
        for w in mc.windows(2) {
            let ((_, a, sa), (x, b, sb)) = (w[0], w[1]);
            let tol = SIGMAS * (sa * sa + sb * sb).sqrt();
            cx.push("mc_monotone", x, a - b + tol, format!("mc {b:.4e} after {a:.4e}, noise allowance {tol:.1e}"));
        }
    }

    if has("capacity_lower") && has("capacity_upper") {
        let up = series(t, "capacity_upper");
        for &(x, lo, el) in &series(t, "capacity_lower") {
            let Some((u, eu)) = at(&up, x) else { continue };
            cx.push("capacity_order", x, u - lo + el + eu, format!("lower {lo:.6} upper {u:.6}"));
        }
        if cx.param == "N" {
            for w in up.windows(2) {
                let ((_, a, ea), (x, b, eb)) = (w[0], w[1]);
                cx.push("capacity_upper_monotone", x, b - a + ea + eb, format!("upper {b:.6} after {a:.6}"));
            }
        }
    }

    if has("exact_subsets") {
        let sub = series(t, "exact_subsets");
        if cx.param == "N" && has("envelope_comono") {
            if let (Some((s1, _)), Some((f, _))) = (at(&sub, 1.0), at(&series(t, "envelope_comono"), 1.0)) {
                cx.push(
                    "subsets_single_port",
                    1.0,
                    SUBSET_N1_TOL - (s1 - f).abs(),
                    format!("subsets {s1:e} vs F {f:e}"),
                );
            }
        }
        for &(x, v, _) in &sub {
            if let Some((m, s)) = at(&mc, x) {
                cx.note("subsets_minus_mc", x, format!("exact_subsets {v:.4e} - mc {m:.4e} = {:.3e} (se {s:.1e})", v - m));
            }
        }
    }

    if has("sp_exact") {
        let exact = series(t, "sp_exact");
        if has("mc") {
            for &(x, e, _) in &exact {
                let Some((m, s)) = at(&mc, x) else { continue };
                let tol = SP_OUTAGE_FLOOR.max(SIGMAS * s);
                cx.push("sp_exact_vs_mc", x, tol - (e - m).abs(), format!("exact {e:.5e} mc {m:.5e} tol {tol:.1e}"));
            }
        }
        let reference = format!("sp_quad_M{SP_QUAD_REFERENCE_ORDER}");
        for r in t.rows.iter().filter(|r| r.method == reference) {
            let Some((e, _)) = at(&exact, r.param_value) else { continue };
            cx.push(
                "sp_quad_vs_exact",
                r.param_value,
                SP_QUAD_TOL - (r.value - e).abs(),
                format!("M={SP_QUAD_REFERENCE_ORDER} {:.6e} exact {e:.6e}", r.value),
            );
        }
        if cx.param == "quadrature_M" {
            let quad: Vec<&Row> = t.rows.iter().filter(|r| r.method.starts_with("sp_quad_M")).collect();
            let errs: Vec<(f64, f64, f64)> = quad
                .iter()
                .filter_map(|r| at(&exact, r.param_value).map(|(e, ee)| (r.param_value, (r.value - e).abs(), ee)))
                .collect();
            for w in errs.windows(2) {
                let ((_, a, ea), (x, b, eb)) = (w[0], w[1]);
                cx.push(
                    "sp_quad_error_monotone",
                    x,
                    a - b + ea + eb,
                    format!("|quad - exact| {b:.2e} after {a:.2e}"),
                );
            }
        }
    }

    if has("sp_cap_exact") {
        let exact = series(t, "sp_cap_exact");
        for &(x, c, _) in &exact {
            if let Some((m, _)) = at(&series(t, "mc_capacity"), x) {
                cx.push("sp_capacity_vs_mc", x, SP_CAPACITY_TOL - (c - m).abs(), format!("exact {c:.5} mc {m:.5}"));
            }
        }
        let default_w: Option<f64> = t.meta("aperture_wavelengths").and_then(|v| v.parse().ok());
        for r in t.rows.iter().filter(|r| r.method.starts_with("sp_cap_quad_")) {
            let w = if cx.param == "W" { Some(r.param_value) } else { default_w };
            if w.map_or(true, |w| w > SP_CAP_QUAD_MAX_W) {
                continue;
            }
            let Some((e, _)) = at(&exact, r.param_value) else { continue };
            cx.push(
                "sp_cap_quad_vs_exact",
                r.param_value,
                SP_CAPACITY_TOL - (r.value - e).abs(),
                format!("{} {:.5} exact {e:.5}", r.method, r.value),
            );
        }
    }

    if has("mc") {
        for m in methods.iter().filter(|m| m.starts_with("mrc")) {
            let mut any = false;
            for &(x, v, _) in &series(t, m) {
                if !(MRC_MID_RANGE.0..=MRC_MID_RANGE.1).contains(&v) {
                    continue;
                }
                let Some((o, s)) = at(&mc, x) else { continue };
                any = true;
                cx.push("mc_below_mrc", x, v - (o + SIGMAS * s), format!("mc {o:.3e} (se {s:.1e}) vs {m} {v:.3e}"));
            }
            if !any {
                cx.push("mc_below_mrc", f64::NAN, -1.0, format!("{m} never enters the mid-range band"));
            }
        }
    }

    if has("ks_gamma_uncorrelated") {
        let g = series(t, "ks_gamma_uncorrelated");
        let gauss = series(t, "ks_gaussian");
        let corr = series(t, "ks_gamma_corrected");
        let unc = series(t, "ks_gamma_uncapped");
        for &(x, k, _) in &g {
            cx.push("ks_gamma", x, KS_LIMIT - k, format!("KS {k:.4}"));
            if let Some((kg, _)) = at(&gauss, x) {
                // Strict inequality: a tie fails.
                let slack = if kg > k { kg - k } else { -(k - kg).max(f64::MIN_POSITIVE) };
                cx.push("gamma_beats_gaussian", x, slack, format!("Gamma {k:.4} Gaussian {kg:.4}"));
            }
        }
        for &(x, c, _) in &corr {
            cx.push("ks_corrected", x, KS_LIMIT - c, format!("KS {c:.4}"));
            if let Some((u, _)) = at(&unc, x) {
                cx.push("ks_corrected_vs_uncapped", x, u - c, format!("corrected {c:.4} uncapped {u:.4}"));
            }
        }
    }
}

/// Runs every applicable check. Tables sharing an experiment name must
/// carry the same config digest.
pub fn evaluate(tables: &[(PathBuf, Table)]) -> Result<Report> {
    if tables.is_empty() {
        return Err(Error::Usage("report needs at least one CSV".into()));
    }
    let mut digests: BTreeMap<String, String> = BTreeMap::new();
    let mut checks = Vec::new();
    for (path, t) in tables {
        let missing = |k: &str| Error::Format { path: path.clone(), msg: format!("no '{k}' metadata line") };
        let experiment = t.meta(EXPERIMENT_KEY).ok_or_else(|| missing(EXPERIMENT_KEY))?;
        let digest = t.meta(DIGEST_KEY).ok_or_else(|| missing(DIGEST_KEY))?;
        if let Some(prev) = digests.get(experiment) {
            if prev != digest {
                return Err(Error::DigestMismatch {
                    experiment: experiment.into(),
                    first: prev.clone(),
                    second: digest.into(),
                });
            }
        }
        digests.insert(experiment.into(), digest.into());
        let param = t.rows.first().map_or("", |r| r.param_name.as_str());
        table_checks(t, &mut Ctx { experiment, param, out: &mut checks });
    }
    Ok(Report { checks })
}

/// Reads and evaluates CSV files.
pub fn evaluate_files(paths: &[impl AsRef<Path>]) -> Result<Report> {
    let tables = paths
        .iter()
        .map(|p| Ok((p.as_ref().to_path_buf(), read_table(p.as_ref())?)))
        .collect::<Result<Vec<_>>>()?;
    evaluate(&tables)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(experiment: &str, digest: &str, param: &str, rows: &[(f64, &str, f64, f64)]) -> (PathBuf, Table) {
        let mut t = Table::default();
        t.push_meta(EXPERIMENT_KEY, experiment);
        t.push_meta(DIGEST_KEY, digest);
        t.rows = rows
            .iter()
            .map(|&(x, m, v, e)| Row {
                param_name: param.into(),
                param_value: x,
                method: m.into(),
                value: v,
                error_estimate: e,
                seed: 1,
            })
            .collect();
        (PathBuf::from(format!("{experiment}.csv")), t)
    }

    #[test]
    fn sandwich_pass_and_fail() {
        let ok = table(
            "a",
            "d",
            "N",
            &[
                (1.0, "envelope_indep", 0.3, 0.0),
                (1.0, "envelope_comono", 0.3, 0.0),
                (1.0, "mc", 0.301, 0.001),
                (2.0, "envelope_indep", 0.09, 0.0),
                (2.0, "envelope_comono", 0.3, 0.0),
                (2.0, "mc", 0.2, 0.001),
            ],
        );
        let r = evaluate(&[ok]).unwrap();
        assert!(r.passed(), "{}", r.render());
        assert!(r.group_passed("a", "envelope_sandwich"));
        assert!(r.group_passed("a", "mc_monotone"));

        let bad = table(
            "b",
            "d",
            "N",
            &[(4.0, "envelope_indep", 0.1, 0.0), (4.0, "envelope_comono", 0.2, 0.0), (4.0, "mc", 0.25, 0.001)],
        );
        let r = evaluate(&[bad]).unwrap();
        assert!(!r.passed());
        let text = r.render();
        assert!(text.contains("violation at N=4"), "{text}");
        assert!(text.contains("FAIL"));
    }

    #[test]
    fn digests_must_agree_within_an_experiment() {
        let a = table("x", "one", "N", &[(1.0, "mc", 0.1, 0.01)]);
        let b = table("x", "two", "N", &[(1.0, "mc", 0.1, 0.01)]);
        assert!(matches!(evaluate(&[a.clone(), b]), Err(Error::DigestMismatch { .. })));
        let c = table("y", "two", "N", &[(1.0, "mc", 0.1, 0.01)]);
        assert!(evaluate(&[a, c]).is_ok());
    }

    #[test]
    fn empty_input_is_usage_error() {
        assert!(matches!(evaluate(&[]), Err(Error::Usage(_))));
    }

    #[test]
    fn mrc_band_must_be_visited() {
        let t = table("m", "d", "snr_threshold_db", &[(0.0, "mc", 0.0, 1e-5), (0.0, "mrc4", 0.5, 0.0)]);
        let r = evaluate(&[t]).unwrap();
        assert!(!r.group_passed("m", "mc_below_mrc"));
        let t = table("m", "d", "snr_threshold_db", &[(0.0, "mc", 1e-3, 1e-5), (0.0, "mrc4", 0.05, 0.0)]);
        assert!(evaluate(&[t]).unwrap().group_passed("m", "mc_below_mrc"));
    }

    #[test]
    fn quadrature_error_must_shrink() {
        let rows = [
            (5.0, "sp_quad_M5", 0.11, 0.0),
            (5.0, "sp_exact", 0.1, 1e-9),
            (10.0, "sp_quad_M10", 0.1001, 0.0),
            (10.0, "sp_exact", 0.1, 1e-9),
            (20.0, "sp_quad_M20", 0.1002, 0.0),
            (20.0, "sp_exact", 0.1, 1e-9),
        ];
        let r = evaluate(&[table("q", "d", "quadrature_M", &rows)]).unwrap();
        assert!(r.group_passed("q", "sp_quad_vs_exact"));
        assert!(!r.group_passed("q", "sp_quad_error_monotone"));
    }
}
