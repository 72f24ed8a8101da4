//! Lower-triangular sampling factor of a correlation matrix.
//!
//! A Bessel-kernel correlation matrix is positive semidefinite in exact
//! arithmetic but can come out slightly indefinite in floating point, and it
//! is exactly singular for a zero aperture. Positive definite inputs are
//! factored by Cholesky. Otherwise the matrix is eigen-decomposed, negative
//! eigenvalues are clipped to zero, the diagonal is rescaled back to one, and
//! a triangular factor of the result is taken from a QR decomposition of the
//! scaled square-root factor.

use super::CorrelationMatrix;
use crate::error::{Error, Result};
use alloc::vec::Vec;
use nalgebra::DMatrix;
#[allow(unused_imports)] // only needed where std does not supply the float methods
use num_traits::Float;

/// Eigenvalues within `CLIP_REPORT_TOL * N * max(1, lambda_max)` of zero are
/// rounding noise around an exact zero and are set to zero silently. More
/// negative ones are clipped and listed in the clip report.
const CLIP_REPORT_TOL: f64 = 1e-12;

/// What was changed to make the matrix factorable.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ClipReport {
    /// Eigenvalues that were clipped to zero, excluding rounding noise.
    pub clipped: Vec<f64>,
    /// Largest change to an entry caused by clipping and rescaling.
    pub max_entry_change: f64,
}

/// `L` with `L L^T` equal to the (clipped) correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFactor {
    n: usize,
    /// Row-major, zero above the diagonal.
    lower: Vec<f64>,
    /// The matrix that `L L^T` reproduces.
    target: Vec<f64>,
    pub report: ClipReport,
}

impl PsdFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// Row `i` of `L` up to and including the diagonal.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.lower[i * self.n..i * self.n + i + 1]
    }

    /// The clipped, renormalized matrix.
    pub fn target(&self) -> &[f64] {
        &self.target
    }

    /// `max |(L L^T - target)_{ij}|`.
    pub fn reconstruction_error(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let s: f64 = (0..=i.min(j)).map(|k| self.lower(i, k) * self.lower(j, k)).sum();
                worst = worst.max((s - self.target[i * n + j]).abs());
            }
        }
        worst
    }
}

/// Factors `r` for correlated sampling.
pub fn psd_factor(r: &CorrelationMatrix) -> Result<PsdFactor> {
    let n = r.dim();
    let m = DMatrix::from_row_slice(n, n, r.entries());
    if let Some(chol) = m.clone().cholesky() {
        let l = chol.unpack();
        return Ok(PsdFactor {
            n,
            lower: lower_row_major(&l),
            target: r.entries().to_vec(),
            report: ClipReport::default(),
        });
    }

    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.iter().copied().fold(1.0, f64::max);
    let noise = CLIP_REPORT_TOL * n as f64 * top;
    let mut clipped = Vec::new();
    let mut sqrt_lambda = Vec::with_capacity(n);
    for &lambda in eig.eigenvalues.iter() {
        if lambda < -noise {
            clipped.push(lambda);
        }
        sqrt_lambda.push(if lambda > noise { lambda.sqrt() } else { 0.0 });
    }
    // B = V sqrt(Lambda+), rows rescaled so B B^T has a unit diagonal.
    let mut b = eig.eigenvectors.clone();
    for (j, &s) in sqrt_lambda.iter().enumerate() {
        b.column_mut(j).scale_mut(s);
    }
    for i in 0..n {
        let norm = b.row(i).norm();
        if norm == 0.0 {
            return Err(Error::Numerical(alloc::format!(
                "correlation matrix row {i} vanishes after eigenvalue clipping"
            )));
        }
        b.row_mut(i).scale_mut(1.0 / norm);
    }
    let target = &b * b.transpose();
    // B^T = Q R  =>  B B^T = R^T R, so L = R^T.
    let qr = b.transpose().qr();
    let mut l = qr.r().transpose();
    for i in 0..n {
        if l[(i, i)] < 0.0 {
            l.column_mut(i).neg_mut();
        }
    }
    let target: Vec<f64> = target.transpose().as_slice().to_vec();
    let max_entry_change = target
        .iter()
        .zip(r.entries())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(PsdFactor {
        n,
        lower: lower_row_major(&l),
        target,
        report: ClipReport { clipped, max_entry_change },
    })
}

fn lower_row_major(m: &DMatrix<f64>) -> Vec<f64> {
    let mut out = Vec::with_capacity(m.nrows() * m.ncols());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(if j > i { 0.0 } else { m[(i, j)] });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{correlation_matrix, FasGeometry};

    #[test]
    fn identity_factor() {
        let f = psd_factor(&CorrelationMatrix::identity(4)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(f.lower(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        assert!(f.report.clipped.is_empty());
    }

    #[test]
    fn all_ones_is_rank_one() {
        let r = correlation_matrix(&FasGeometry::new(6, 0.0).unwrap()).unwrap();
        let f = psd_factor(&r).unwrap();
        assert!(f.report.clipped.is_empty());
        assert!(f.reconstruction_error() < 1e-12, "{}", f.reconstruction_error());
        for i in 0..6 {
            assert!((f.lower(i, 0) - 1.0).abs() < 1e-12);
            for j in 1..=i {
                assert_eq!(f.lower(i, j), 0.0, "L[{i}][{j}]");
            }
        }
    }

    #[test]
    fn large_dense_array() {
        let r = correlation_matrix(&FasGeometry::new(64, 2.0).unwrap()).unwrap();
        let f = psd_factor(&r).unwrap();
        assert!(f.reconstruction_error() <= 1e-10, "{} {:?}", f.reconstruction_error(), f.report);
        for i in 0..64 {
            assert!((f.target()[i * 64 + i] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_input_is_clipped() {
        // Symmetric with unit diagonal but eigenvalue 1 - 2 * 0.9 < 0.
        let r = CorrelationMatrix::from_entries(
            3,
            alloc::vec![1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0],
        )
        .unwrap();
        let f = psd_factor(&r).unwrap();
        assert_eq!(f.report.clipped.len(), 1);
        assert!(f.report.max_entry_change > 0.0);
        assert!(f.reconstruction_error() < 1e-12);
    }
}
