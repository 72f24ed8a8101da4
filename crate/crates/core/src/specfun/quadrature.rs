//! Gaussian quadrature rules.
//!
//! Hermite and Laguerre rules are built with the Golub-Welsch construction:
//! the eigenvalues of the symmetric tridiagonal Jacobi matrix of the
//! three-term recurrence are the nodes. Eigenvalues come from an implicit QL
//! sweep; each node is then polished by Newton iteration on the orthonormal
//! recurrence and its weight taken from the Christoffel function
//! `w_i = 1 / sum_k p_k(x_i)^2`, which stays accurate for the tiny weights at
//! the far nodes where eigenvector components lose relative precision.

use crate::error::{domain, Result};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Largest supported rule order.
pub const MAX_ORDER: usize = 128;

/// Weight function of a rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum RuleKind {
    /// `e^{-x^2}` on the real line.
    Hermite,
    /// `e^{-t}` on `[0, inf)`.
    Laguerre,
    /// `1` on `[-1, 1]`.
    Legendre,
}

impl RuleKind {
    /// Total mass of the weight function.
    pub fn mass(self) -> f64 {
        match self {
            RuleKind::Hermite => core::f64::consts::PI.sqrt(),
            RuleKind::Laguerre => 1.0,
            RuleKind::Legendre => 2.0,
        }
    }

    /// Diagonal `a_k` and squared off-diagonal `b_k` (k >= 1) of the Jacobi
    /// matrix.
    fn recurrence(self, k: usize) -> (f64, f64) {
        let kf = k as f64;
        match self {
            RuleKind::Hermite => (0.0, 0.5 * kf),
            RuleKind::Laguerre => (2.0 * kf + 1.0, kf * kf),
            RuleKind::Legendre => (0.0, kf * kf / (4.0 * kf * kf - 1.0)),
        }
    }
}

/// An `order`-point Gaussian rule: `int w(x) f(x) dx ~ sum_i weights[i] f(nodes[i])`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct QuadratureRule {
    pub kind: RuleKind,
    pub order: usize,
    /// Strictly increasing abscissas.
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// Applies the rule to `f`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss-Hermite rule of order `m` (weight `e^{-x^2}`).
pub fn gauss_hermite_rule(m: usize) -> Result<QuadratureRule> {
    golub_welsch(RuleKind::Hermite, m)
}

/// Gauss-Laguerre rule of order `l` (weight `e^{-t}`).
pub fn gauss_laguerre_rule(l: usize) -> Result<QuadratureRule> {
    golub_welsch(RuleKind::Laguerre, l)
}

/// Gauss-Legendre rule of order `n` on `[-1, 1]`.
pub fn gauss_legendre_rule(n: usize) -> Result<QuadratureRule> {
    golub_welsch(RuleKind::Legendre, n)
}

fn golub_welsch(kind: RuleKind, n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > MAX_ORDER {
        return Err(domain!("quadrature order must be in 1..={MAX_ORDER}, got {n}"));
    }
    let mut diag: Vec<f64> = (0..n).map(|k| kind.recurrence(k).0).collect();
    let mut off: Vec<f64> = (0..n)
        .map(|k| if k + 1 < n { kind.recurrence(k + 1).1.sqrt() } else { 0.0 })
        .collect();
    tridiagonal_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.total_cmp(b));

    let mut nodes = diag;
    let mut weights = vec![0.0; n];
    for (x, w) in nodes.iter_mut().zip(weights.iter_mut()) {
        for _ in 0..3 {
            let (p, dp, _) = orthonormal_eval(kind, n, *x);
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
                break;
            }
        }
        let (_, _, christoffel) = orthonormal_eval(kind, n, *x);
        *w = 1.0 / christoffel;
    }

    if kind != RuleKind::Laguerre {
        // Symmetric weight: enforce exact mirror symmetry.
        for i in 0..n / 2 {
            let j = n - 1 - i;
            let x = 0.5 * (nodes[j] - nodes[i]);
            let w = 0.5 * (weights[i] + weights[j]);
            nodes[i] = -x;
            nodes[j] = x;
            weights[i] = w;
            weights[j] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
    }

    for pair in nodes.windows(2) {
        if pair[0] >= pair[1] {
            return Err(crate::error::Error::Numerical(alloc::format!(
                "{kind:?} rule of order {n}: nodes not strictly increasing"
            )));
        }
    }
    Ok(QuadratureRule { kind, order: n, nodes, weights })
}

/// Evaluates the orthonormal polynomial `p_n` and its derivative at `x`,
/// plus `sum_{k<n} p_k(x)^2`.
fn orthonormal_eval(kind: RuleKind, n: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut dp_prev = 0.0;
    let mut p = 1.0 / kind.mass().sqrt();
    let mut dp = 0.0;
    let mut sum_sq = 0.0;
    let mut b_prev = 0.0;
    for k in 0..n {
        sum_sq += p * p;
        let a = kind.recurrence(k).0;
        let b = kind.recurrence(k + 1).1.sqrt();
        let p_next = ((x - a) * p - b_prev * p_prev) / b;
        let dp_next = ((x - a) * dp + p - b_prev * dp_prev) / b;
        p_prev = p;
        dp_prev = dp;
        p = p_next;
        dp = dp_next;
        b_prev = b;
    }
    (p, dp, sum_sq)
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson
/// shifts. `diag` is overwritten with the eigenvalues; `off[i]` couples rows
/// `i` and `i + 1` and is destroyed.
fn tridiagonal_eigenvalues(diag: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = diag[m].abs() + diag[m + 1].abs();
                if off[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(crate::error::Error::Numerical(
                    "tridiagonal QL iteration did not converge".into(),
                ));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + off[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[m] = 0.0;
        }
    }
    Ok(())
}

// 12-point Gauss-Legendre rule on [-1, 1], positive half.
pub(crate) const GL12_X: [f64; 6] = [
    0.125_233_408_511_468_915_47,
    0.367_831_498_998_180_193_75,
    0.587_317_954_286_617_447_3,
    0.769_902_674_194_304_687_04,
    0.904_117_256_370_474_856_68,
    0.981_560_634_246_719_250_69,
];
pub(crate) const GL12_W: [f64; 6] = [
    0.249_147_045_813_402_785,
    0.233_492_536_538_354_808_76,
    0.203_167_426_723_065_921_75,
    0.160_078_328_543_346_226_33,
    0.106_939_325_995_318_430_96,
    0.047_175_336_386_511_827_195,
];

/// Composite 12-point Gauss-Legendre over `panels` equal panels of `[lo, hi]`.
pub(crate) fn gl12_panels<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, panels: usize) -> f64 {
    let h = (hi - lo) / panels as f64;
    let half = 0.5 * h;
    let mut total = 0.0;
    for i in 0..panels {
        let mid = lo + (i as f64 + 0.5) * h;
        let mut s = 0.0;
        for j in 0..6 {
            let dx = half * GL12_X[j];
            s += GL12_W[j] * (f(mid - dx) + f(mid + dx));
        }
        total += s * half;
    }
    total
}

// Gauss-Kronrod 15-point nodes on [0, 1] (descending; the last is the
// centre), their Kronrod weights, and the embedded 7-point Gauss weights for
// odd-indexed nodes plus the centre.
pub(crate) const GK15_X: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
pub(crate) const GK15_WK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
pub(crate) const GK15_WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];
