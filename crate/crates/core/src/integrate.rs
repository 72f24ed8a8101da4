//! Adaptive Gauss-Kronrod integration in one and two dimensions.
//!
//! Both integrators keep a max-heap of cells keyed by their local error
//! estimate and bisect (1-D) or quarter (2-D) the worst one until the summed
//! error meets the tolerance. The error of a cell is the difference between
//! its 15-point Kronrod and embedded 7-point Gauss results, which is
//! pessimistic for smooth integrands. Results do not depend on evaluation
//! order beyond the deterministic heap order.

use crate::specfun::{GK15_WG, GK15_WK, GK15_X};
use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

/// An integral value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    /// Whether the requested tolerance was met before the cell budget ran out.
    pub converged: bool,
}

/// Stopping rule: stop once `error <= max(abs, rel * |value|)` or after
/// `max_cells` subdivisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_cells: usize,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0, max_cells: 4000 }
    }

    fn met(&self, value: f64, error: f64) -> bool {
        error <= self.abs.max(self.rel * value.abs())
    }
}

struct Cell<T> {
    error: f64,
    value: f64,
    region: T,
}

impl<T> PartialEq for Cell<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl<T> Eq for Cell<T> {}
impl<T> PartialOrd for Cell<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Cell<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// 15-point Kronrod and 7-point Gauss values of `f` on `[a, b]`.
pub(crate) fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = GK15_WK[7] * fc;
    let mut g = GK15_WG[3] * fc;
    for j in 0..7 {
        let dx = h * GK15_X[j];
        let pair = f(c - dx) + f(c + dx);
        k += GK15_WK[j] * pair;
        if j % 2 == 1 {
            g += GK15_WG[j / 2] * pair;
        }
    }
    (k * h, g * h)
}

/// Adaptive integral of `f` over the finite interval `[a, b]`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: Tolerance) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let mut heap = BinaryHeap::new();
    let (k, g) = gk15(&mut f, a, b);
    heap.push(Cell { error: (k - g).abs(), value: k, region: (a, b) });
    let mut value = k;
    let mut error = (k - g).abs();
    let mut cells = 1;
    while !tol.met(value, error) && cells < tol.max_cells {
        let Some(worst) = heap.pop() else { break };
        let (lo, hi) = worst.region;
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            // Interval exhausted at machine resolution; keep the cell.
            heap.push(worst);
            break;
        }
        value -= worst.value;
        error -= worst.error;
        for (l, h) in [(lo, mid), (mid, hi)] {
            let (k, g) = gk15(&mut f, l, h);
            let e = (k - g).abs();
            value += k;
            error += e;
            heap.push(Cell { error: e, value: k, region: (l, h) });
        }
        cells += 1;
    }
    // Re-sum to shed the drift of the running updates.
    let (value, error) = resum(&heap);
    Estimate { value, error, converged: tol.met(value, error) }
}

/// Adaptive integral of `f(x, y)` over the rectangle `[x0, x1] x [y0, y1]`
/// with a tensor-product Gauss-Kronrod rule and quadrant subdivision.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    x: (f64, f64),
    y: (f64, f64),
    tol: Tolerance,
) -> Estimate {
    let mut heap = BinaryHeap::new();
    let root = [x.0, x.1, y.0, y.1];
    let (k, g) = gk15_2d(&mut f, root);
    heap.push(Cell { error: (k - g).abs(), value: k, region: root });
    let mut value = k;
    let mut error = (k - g).abs();
    let mut cells = 1;
    while !tol.met(value, error) && cells < tol.max_cells {
        let Some(worst) = heap.pop() else { break };
        let [xa, xb, ya, yb] = worst.region;
        let xm = 0.5 * (xa + xb);
        let ym = 0.5 * (ya + yb);
        value -= worst.value;
        error -= worst.error;
        for region in [[xa, xm, ya, ym], [xm, xb, ya, ym], [xa, xm, ym, yb], [xm, xb, ym, yb]] {
            let (k, g) = gk15_2d(&mut f, region);
            let e = (k - g).abs();
            value += k;
            error += e;
            heap.push(Cell { error: e, value: k, region });
        }
        cells += 3;
    }
    let (value, error) = resum(&heap);
    Estimate { value, error, converged: tol.met(value, error) }
}

fn gk15_2d<F: FnMut(f64, f64) -> f64>(f: &mut F, r: [f64; 4]) -> (f64, f64) {
    let nodes = |lo: f64, hi: f64| {
        let c = 0.5 * (lo + hi);
        let h = 0.5 * (hi - lo);
        let mut pts = [0.0; 15];
        let mut wk = [0.0; 15];
        let mut wg = [0.0; 15];
        for j in 0..7 {
            pts[j] = c - h * GK15_X[j];
            pts[14 - j] = c + h * GK15_X[j];
            wk[j] = GK15_WK[j] * h;
            wk[14 - j] = wk[j];
            if j % 2 == 1 {
                wg[j] = GK15_WG[j / 2] * h;
                wg[14 - j] = wg[j];
            }
        }
        pts[7] = c;
        wk[7] = GK15_WK[7] * h;
        wg[7] = GK15_WG[3] * h;
        (pts, wk, wg)
    };
    let (xs, xk, xg) = nodes(r[0], r[1]);
    let (ys, yk, yg) = nodes(r[2], r[3]);
    let mut k = 0.0;
    let mut g = 0.0;
    for i in 0..15 {
        let mut row_k = 0.0;
        let mut row_g = 0.0;
        for j in 0..15 {
            let v = f(xs[i], ys[j]);
            row_k += yk[j] * v;
            row_g += yg[j] * v;
        }
        k += xk[i] * row_k;
        g += xg[i] * row_g;
    }
    (k, g)
}

fn resum<T>(heap: &BinaryHeap<Cell<T>>) -> (f64, f64) {
    // Sort by value so the total is independent of heap layout details.
    let mut parts: Vec<(f64, f64)> = heap.iter().map(|c| (c.value, c.error)).collect();
    parts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    parts.iter().fold((0.0, 0.0), |(v, e), &(pv, pe)| (v + pv, e + pe))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact_in_one_cell() {
        let est = integrate_1d(|x| x.powi(10) - 3.0 * x, -1.0, 2.0, Tolerance::absolute(1e-12));
        let expect = (2f64.powi(11) + 1.0) / 11.0 - 1.5 * (4.0 - 1.0);
        assert!((est.value - expect).abs() < 1e-12);
        assert!(est.converged);
    }

    #[test]
    fn peaked_and_oscillatory() {
        let est = integrate_1d(|x| 1.0 / (1e-4 + x * x), -1.0, 1.0, Tolerance::absolute(1e-10));
        let expect = 2.0 * 100.0 * (100.0f64).atan();
        assert!(est.converged);
        assert!((est.value - expect).abs() < 1e-8, "{} vs {expect}", est.value);
        let est = integrate_1d(|x| (50.0 * x).sin().powi(2), 0.0, 3.0, Tolerance::absolute(1e-12));
        let expect = 1.5 - (300.0f64).sin() / 200.0;
        assert!((est.value - expect).abs() < 1e-11);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = Tolerance { abs: 1e-14, rel: 0.0, max_cells: 3 };
        let est = integrate_1d(|x| x.abs().sqrt().recip(), -1.0, 1.0, tol);
        assert!(!est.converged);
    }

    #[test]
    fn gaussian_box() {
        let est = integrate_2d(
            |x, y| (-(x * x + y * y) / 2.0).exp() / (2.0 * core::f64::consts::PI),
            (-8.0, 8.0),
            (-8.0, 8.0),
            Tolerance::absolute(1e-10),
        );
        assert!(est.converged);
        assert!((est.value - 1.0).abs() < 1e-10);
        let est = integrate_2d(|x, y| x * y * y, (0.0, 1.0), (0.0, 2.0), Tolerance::absolute(1e-13));
        assert!((est.value - 4.0 / 3.0).abs() < 1e-13);
    }
}
