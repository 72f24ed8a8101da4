//! Outage and capacity of the single-path port model.
//!
//! Given the shared component `x_0 + j y_0`, port amplitudes are independent
//! Rician variables, so the best-port CDF is a product of Marcum-Q
//! complements averaged over the shared component. Here the shared
//! component is written `(x + j y) / sqrt(2)` with `x, y` standard normal,
//! which keeps the averaging weight the standard bivariate normal density
//! while the port model itself uses variance-1/2 components.
//!
//! Thresholds are amplitude thresholds on `|h_k|`; pass `sqrt(gamma')` for
//! a power threshold `gamma'`.

use crate::analysis_general::{capacity_from_survival_tol, DEFAULT_CAPACITY_LIMIT};
use crate::channel::{rician_split, SinglePathParams};
use crate::error::{domain, Error, Result};
use crate::integrate::{integrate_2d, Estimate, Tolerance};
use crate::specfun::{gauss_hermite_rule, gauss_laguerre_rule, marcum_tails};
use alloc::vec::Vec;
use core::f64::consts::{LN_2, PI, SQRT_2};
use num_complex::Complex64;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Half-width of the integration box in standard deviations of `x`, `y`.
pub const BOX_HALF_WIDTH: f64 = 8.0;

/// Default absolute tolerance of the 2-D integrals.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default quadrature orders.
pub const DEFAULT_HERMITE_ORDER: usize = 20;
pub const DEFAULT_LAGUERRE_ORDER: usize = 40;

/// Cell budget of the outer 2-D integration.
const MAX_CELLS_2D: usize = 40_000;

/// Port amplitudes conditioned on the shared component.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalRician {
    /// Per-dimension standard deviation of the remaining diffuse part,
    /// `sigma^2 = beta^2 (1 - mu^2) / (2 (K + 1))`.
    pub sigma: f64,
    /// `c_k = alpha_k beta sqrt(K/(K+1)) + mu beta sqrt(1/(2(K+1))) (x + j y)`.
    pub centers: Vec<Complex64>,
}

/// Precomputed pieces of the conditional model.
struct Model<'a> {
    sp: &'a SinglePathParams,
    spec: f64,
    shared: f64,
    sigma: f64,
}

impl<'a> Model<'a> {
    fn new(sp: &'a SinglePathParams) -> Result<Self> {
        sp.validate()?;
        let (spec, diffuse) = rician_split(sp.rician_k);
        let own = (1.0 - sp.port_mu * sp.port_mu).max(0.0);
        let sigma = sp.beta * (diffuse * own * 0.5).sqrt();
        if !(sigma > 0.0) {
            return Err(Error::Degenerate(alloc::format!(
                "conditional diffuse variance is zero (mu = {}, K = {})",
                sp.port_mu,
                sp.rician_k
            )));
        }
        Ok(Model {
            sp,
            spec: spec * sp.beta,
            shared: sp.port_mu * sp.beta * (diffuse * 0.5).sqrt(),
            sigma,
        })
    }

    #[inline]
    fn center(&self, k: usize, x: f64, y: f64) -> Complex64 {
        self.sp.specular_per_port[k] * self.spec + Complex64::new(x, y) * self.shared
    }

    /// `sum_k ln(1 - Q1(|c_k| / sigma, b))`, reusing the last value when
    /// consecutive ports have the same center magnitude.
    ///
    /// More than `TAIL_GAP` from the peak, `Q1 <= exp(-(b - a)^2 / 2)` (or
    /// its complement for `b < a`) is below 1e-16 and taken as exactly 0.
    fn ln_all_below(&self, x: f64, y: f64, b: f64) -> f64 {
        const TAIL_GAP: f64 = 8.6;
        let mut total = 0.0;
        let mut last = (f64::NAN, 0.0);
        for k in 0..self.sp.num_ports() {
            let a = self.center(k, x, y).norm() / self.sigma;
            if a != last.0 {
                let ln_p = if b - a > TAIL_GAP {
                    0.0
                } else if a - b > TAIL_GAP {
                    f64::NEG_INFINITY
                } else {
                    marcum_tails(a, b).p.ln()
                };
                last = (a, ln_p);
            }
            total += last.1;
        }
        total
    }
}

/// The conditional model at shared component `(x + j y) / sqrt(2)`.
pub fn conditional_params(sp: &SinglePathParams, x: f64, y: f64) -> Result<ConditionalRician> {
    let m = Model::new(sp)?;
    if !x.is_finite() || !y.is_finite() {
        return Err(domain!("conditioning point must be finite"));
    }
    Ok(ConditionalRician {
        sigma: m.sigma,
        centers: (0..sp.num_ports()).map(|k| m.center(k, x, y)).collect(),
    })
}

#[inline]
fn std_normal_2d(x: f64, y: f64) -> f64 {
    (-(x * x + y * y) * 0.5).exp() / (2.0 * PI)
}

fn check_threshold(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(domain!("amplitude threshold must be finite and > 0, got {gamma}"));
    }
    Ok(())
}

/// `P(max_k |h_k| <= gamma)` by adaptive integration of the conditional
/// product over `[-8, 8]^2`.
pub fn outage_exact_numeric(sp: &SinglePathParams, gamma: f64, tol: f64) -> Result<Estimate> {
    check_threshold(gamma)?;
    let m = Model::new(sp)?;
    let b = gamma / m.sigma;
    if m.shared == 0.0 {
        // Nothing depends on the shared component.
        return Ok(Estimate { value: m.ln_all_below(0.0, 0.0, b).exp(), error: 0.0, converged: true });
    }
    let est = integrate_2d(
        |x, y| m.ln_all_below(x, y, b).exp() * std_normal_2d(x, y),
        (-BOX_HALF_WIDTH, BOX_HALF_WIDTH),
        (-BOX_HALF_WIDTH, BOX_HALF_WIDTH),
        Tolerance { abs: tol, rel: 0.0, max_cells: MAX_CELLS_2D },
    );
    if !est.converged {
        return Err(Error::Integration {
            what: "single-path outage",
            value: est.value,
            achieved: est.error,
            requested: tol,
        });
    }
    Ok(Estimate { value: est.value.clamp(0.0, 1.0), ..est })
}

/// Gauss-Hermite approximation of [`outage_exact_numeric`] with `order`
/// nodes per dimension.
pub fn outage_quadrature(sp: &SinglePathParams, gamma: f64, order: usize) -> Result<f64> {
    check_threshold(gamma)?;
    let m = Model::new(sp)?;
    let rule = gauss_hermite_rule(order)?;
    let b = gamma / m.sigma;
    let mut total = 0.0;
    for (&xm, &wm) in rule.nodes.iter().zip(&rule.weights) {
        for (&xn, &wn) in rule.nodes.iter().zip(&rule.weights) {
            total += wm * wn * m.ln_all_below(SQRT_2 * xm, SQRT_2 * xn, b).exp();
        }
    }
    Ok((total / PI).clamp(0.0, 1.0))
}

/// Conditional capacity integral `int_0^inf S(g | x, y) / (1 + g) dg` in
/// nats, with `S = 1 - prod_k (1 - Q1(|c_k| / sigma, sqrt(g) / sigma))`.
fn conditional_capacity_nats(m: &Model, x: f64, y: f64, tol: f64) -> Result<Estimate> {
    let est = capacity_from_survival_tol(
        |g| -m.ln_all_below(x, y, g.sqrt() / m.sigma).exp_m1(),
        DEFAULT_CAPACITY_LIMIT,
        Tolerance { abs: tol, rel: 0.0, max_cells: 4000 },
    )?;
    Ok(Estimate { value: est.value * LN_2, error: est.error * LN_2, ..est })
}

/// Ergodic capacity `E log2(1 + max_k |h_k|^2)` by nested adaptive
/// integration.
pub fn capacity_exact_numeric(sp: &SinglePathParams, tol: f64) -> Result<Estimate> {
    let m = Model::new(sp)?;
    if m.shared == 0.0 {
        let e = conditional_capacity_nats(&m, 0.0, 0.0, tol * LN_2)?;
        return Ok(Estimate { value: e.value / LN_2, error: e.error / LN_2, converged: e.converged });
    }
    let mut failure = None;
    let mut inner_error = 0.0f64;
    let est = integrate_2d(
        |x, y| {
            let w = std_normal_2d(x, y);
            if w < 1e-300 {
                return 0.0;
            }
            match conditional_capacity_nats(&m, x, y, 0.1 * tol * LN_2) {
                Ok(e) => {
                    inner_error = inner_error.max(e.error);
                    w * e.value
                }
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            }
        },
        (-BOX_HALF_WIDTH, BOX_HALF_WIDTH),
        (-BOX_HALF_WIDTH, BOX_HALF_WIDTH),
        Tolerance { abs: tol * LN_2, rel: 0.0, max_cells: MAX_CELLS_2D },
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let value = est.value / LN_2;
    let error = (est.error + inner_error) / LN_2;
    if !est.converged {
        return Err(Error::Integration { what: "single-path capacity", value, achieved: error, requested: tol });
    }
    Ok(Estimate { value, error, converged: true })
}

/// Constant in front of the double Gauss-Hermite / Gauss-Laguerre sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum CapacityPrefactor {
    /// `2 / ln 2`.
    Printed,
    /// `1 / (pi ln 2)`, from mapping the bivariate normal onto the
    /// Hermite weight.
    Normalized,
}

impl CapacityPrefactor {
    pub fn value(self) -> f64 {
        match self {
            CapacityPrefactor::Printed => 2.0 / LN_2,
            CapacityPrefactor::Normalized => 1.0 / (PI * LN_2),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            CapacityPrefactor::Printed => "printed 2/ln2",
            CapacityPrefactor::Normalized => "normalized 1/(pi ln2)",
        }
    }
}

/// `sum_m sum_n w_m w_n sum_l w_l H(t_l)` with
/// `H(t) = S(t) e^{t - ln(1 + t)}`, the Laguerre weight folded into the
/// exponent so large nodes do not overflow.
pub fn capacity_quadrature_sum(sp: &SinglePathParams, hermite: usize, laguerre: usize) -> Result<f64> {
    let m = Model::new(sp)?;
    let gh = gauss_hermite_rule(hermite)?;
    let gl = gauss_laguerre_rule(laguerre)?;
    let ln_wl: Vec<(f64, f64)> = gl
        .nodes
        .iter()
        .zip(&gl.weights)
        .map(|(&t, &w)| (t, w.ln() + t - t.ln_1p()))
        .collect();
    let mut total = 0.0;
    for (&xm, &wm) in gh.nodes.iter().zip(&gh.weights) {
        for (&xn, &wn) in gh.nodes.iter().zip(&gh.weights) {
            let (x, y) = (SQRT_2 * xm, SQRT_2 * xn);
            let mut inner = 0.0;
            for &(t, ln_w) in &ln_wl {
                let s = -m.ln_all_below(x, y, t.sqrt() / m.sigma).exp_m1();
                if s > 0.0 {
                    inner += (s.ln() + ln_w).exp();
                }
            }
            total += wm * wn * inner;
        }
    }
    Ok(total)
}

/// Gauss-Hermite / Gauss-Laguerre capacity with the given prefactor.
pub fn capacity_quadrature(
    sp: &SinglePathParams,
    hermite: usize,
    laguerre: usize,
    prefactor: CapacityPrefactor,
) -> Result<f64> {
    Ok(prefactor.value() * capacity_quadrature_sum(sp, hermite, laguerre)?)
}

/// Outcome of matching the quadrature prefactor against the nested
/// integral on one configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrefactorCalibration {
    pub matched: CapacityPrefactor,
    /// `exact / sum`, the constant the data asks for.
    pub fitted: f64,
    pub exact: f64,
    pub sum: f64,
}

/// Picks the prefactor whose value is closest (in ratio) to
/// `capacity_exact_numeric / capacity_quadrature_sum` on `sp`.
pub fn calibrate_prefactor(
    sp: &SinglePathParams,
    hermite: usize,
    laguerre: usize,
    tol: f64,
) -> Result<PrefactorCalibration> {
    let exact = capacity_exact_numeric(sp, tol)?.value;
    let sum = capacity_quadrature_sum(sp, hermite, laguerre)?;
    if !(sum > 0.0) || !(exact > 0.0) {
        return Err(Error::Numerical(alloc::format!(
            "cannot calibrate on a zero-capacity configuration (exact {exact}, sum {sum})"
        )));
    }
    let fitted = exact / sum;
    let matched = [CapacityPrefactor::Printed, CapacityPrefactor::Normalized]
        .into_iter()
        .min_by(|a, b| (fitted / a.value()).ln().abs().total_cmp(&(fitted / b.value()).ln().abs()))
        .unwrap_or(CapacityPrefactor::Normalized);
    Ok(PrefactorCalibration { matched, fitted, exact, sum })
}

/// Marginal CDF of one port amplitude, `P(|h_k| <= gamma)`, by a 1-D
/// average over the shared component's magnitude. Used as an independent
/// check on the product form.
pub fn marginal_cdf(sp: &SinglePathParams, port: usize, gamma: f64) -> Result<f64> {
    check_threshold(gamma)?;
    if port >= sp.num_ports() {
        return Err(Error::Dimension { expected: port + 1, found: sp.num_ports() });
    }
    // Unconditionally, h_k is Rician with the full diffuse variance.
    let (spec, diffuse) = rician_split(sp.rician_k);
    let s = sp.beta * (diffuse * 0.5).sqrt();
    if !(s > 0.0) {
        return Err(Error::Degenerate(alloc::string::String::from("no diffuse power")));
    }
    let a = (sp.specular_per_port[port] * spec * sp.beta).norm() / s;
    Ok(marcum_tails(a, gamma / s).p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::FasGeometry;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn params(n: usize, w: f64, k: f64, beta: f64) -> SinglePathParams {
        SinglePathParams::for_geometry(&FasGeometry::new(n, w).unwrap(), beta, k, None).unwrap()
    }

    #[test]
    fn conditional_substitutions() {
        let mut sp = params(3, 1.0, 0.0, 2.0);
        sp.port_mu = 0.4;
        let c = conditional_params(&sp, 1.5, -0.5).unwrap();
        let expect = Complex64::new(1.5, -0.5) * 0.4 * 2.0 * FRAC_1_SQRT_2;
        assert!((c.centers[0] - expect).norm() < 1e-15);
        assert!((c.sigma * c.sigma - 4.0 * (1.0 - 0.16) / 2.0).abs() < 1e-14);
        let sp = params(2, 1.0, 5.0, 1.0);
        let c = conditional_params(&sp, 0.0, 0.0).unwrap();
        assert!((c.centers[1].norm() - (5.0f64 / 6.0).sqrt()).abs() < 1e-15);
        let mut sp = params(2, 1.0, 5.0, 1.0);
        sp.port_mu = 0.0;
        let a = conditional_params(&sp, 0.0, 0.0).unwrap();
        let b = conditional_params(&sp, 3.0, 1.0).unwrap();
        assert_eq!(a, b);
        sp.port_mu = 1.0;
        assert!(matches!(conditional_params(&sp, 0.0, 0.0), Err(Error::Degenerate(_))));
    }

    #[test]
    fn single_port_without_sharing_is_rician() {
        let mut sp = params(1, 0.0, 3.0, 1.0);
        sp.port_mu = 0.0;
        for &g in &[0.3, 0.9, 1.4] {
            let exact = outage_exact_numeric(&sp, g, 1e-10).unwrap().value;
            let marginal = marginal_cdf(&sp, 0, g).unwrap();
            assert!((exact - marginal).abs() < 1e-9, "{exact} {marginal}");
            for m in [1, 5, 20] {
                assert!((outage_quadrature(&sp, g, m).unwrap() - marginal).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn marginal_matches_product_form() {
        // With one port the conditional average must reproduce the marginal.
        let sp = params(1, 0.0, 5.0, 1.0);
        let mut sp = sp;
        sp.port_mu = 0.6;
        let g = 0.8;
        let exact = outage_exact_numeric(&sp, g, 1e-10).unwrap().value;
        assert!((exact - marginal_cdf(&sp, 0, g).unwrap()).abs() < 1e-8);
    }

    #[test]
    fn threshold_limits() {
        let sp = params(4, 1.0, 5.0, 1.0);
        assert!(outage_exact_numeric(&sp, 1e-6, 1e-8).unwrap().value < 1e-12);
        assert!((outage_exact_numeric(&sp, 20.0, 1e-8).unwrap().value - 1.0).abs() < 1e-8);
        assert!(outage_exact_numeric(&sp, 0.0, 1e-8).is_err());
    }

    #[test]
    fn hermite_order_one_is_origin() {
        let sp = params(4, 1.0, 5.0, 1.0);
        let m = Model::new(&sp).unwrap();
        let origin = m.ln_all_below(0.0, 0.0, 0.9 / m.sigma).exp();
        assert!((outage_quadrature(&sp, 0.9, 1).unwrap() - origin).abs() < 1e-14);
    }

    #[test]
    fn deterministic_capacity_limit() {
        let mut sp = params(1, 0.0, 1e9, 1.0);
        sp.port_mu = 0.0;
        let c = capacity_exact_numeric(&sp, 1e-6).unwrap();
        assert!((c.value - 1.0).abs() < 1e-4, "{}", c.value);
    }
}
