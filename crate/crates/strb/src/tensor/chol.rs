//! Dense Cholesky factorization exposing the upper factor `H` with
//! `X = H^T H`, plus the triangular solves the basis constructions need.

use super::{Result, TensorError};
use crate::{DMat, DVec};
use super::sparse::SparseMatrix;

/// Upper-triangular Cholesky factor of a symmetric positive definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    h: DMat,
}

/// Factors a symmetric positive definite sparse matrix as `X = H^T H`.
///
/// Symmetry is checked to `1e-12` relative to the largest stored entry; the
/// error for an indefinite matrix names the offending pivot index.
pub fn cholesky(x: &SparseMatrix) -> Result<CholeskyFactor> {
    if x.rows() != x.cols() {
        return Err(TensorError::NotSquare { rows: x.rows(), cols: x.cols() });
    }
    let scale = x.max_abs().max(f64::MIN_POSITIVE);
    let (dev, i, j) = x.symmetry_deviation();
    if dev > 1e-12 * scale {
        return Err(TensorError::NotSymmetric { i, j, deviation: dev });
    }
    let n = x.rows();
    let mut h = x.to_dense();
    // In-place up-looking factorization; only the upper triangle is
    // referenced and the lower triangle is zeroed at the end.
    for k in 0..n {
        let mut d = h[(k, k)];
        for r in 0..k {
            d -= h[(r, k)] * h[(r, k)];
        }
        if d <= 0.0 {
            return Err(TensorError::NonPositivePivot { index: k, value: d });
        }
        let hkk = d.sqrt();
        h[(k, k)] = hkk;
        for c in (k + 1)..n {
            let mut v = h[(k, c)];
            for r in 0..k {
                v -= h[(r, k)] * h[(r, c)];
            }
            h[(k, c)] = v / hkk;
        }
    }
    for c in 0..n {
        for r in (c + 1)..n {
            h[(r, c)] = 0.0;
        }
    }
    Ok(CholeskyFactor { h })
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    /// The upper factor `H`.
    pub fn h(&self) -> &DMat {
        &self.h
    }

    /// `H^T H`, for recomposition checks.
    pub fn reconstruct(&self) -> DMat {
        self.h.transpose() * &self.h
    }

    /// `H v`.
    pub fn apply(&self, v: &DVec) -> DVec {
        &self.h * v
    }

    /// Solves `H y = b` (back substitution), i.e. `y = H^{-1} b`.
    pub fn solve_upper(&self, b: &DVec) -> DVec {
        let n = self.dim();
        let mut y = b.clone();
        for i in (0..n).rev() {
            let mut v = y[i];
            for j in (i + 1)..n {
                v -= self.h[(i, j)] * y[j];
            }
            y[i] = v / self.h[(i, i)];
        }
        y
    }

    /// Solves `H^T y = b` (forward substitution), i.e. `y = H^{-T} b`.
    pub fn solve_upper_transpose(&self, b: &DVec) -> DVec {
        let n = self.dim();
        let mut y = b.clone();
        for i in 0..n {
            let mut v = y[i];
            for j in 0..i {
                v -= self.h[(j, i)] * y[j];
            }
            y[i] = v / self.h[(i, i)];
        }
        y
    }

    /// Solves `X y = b` with `X = H^T H`.
    pub fn solve_spd(&self, b: &DVec) -> DVec {
        self.solve_upper(&self.solve_upper_transpose(b))
    }

    /// `H^{-1} B` column by column.
    pub fn solve_upper_mat(&self, b: &DMat) -> DMat {
        let mut y = DMat::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            y.set_column(c, &self.solve_upper(&b.column(c).clone_owned()));
        }
        y
    }

    /// `H^{-T} B` column by column.
    pub fn solve_upper_transpose_mat(&self, b: &DMat) -> DMat {
        let mut y = DMat::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            y.set_column(c, &self.solve_upper_transpose(&b.column(c).clone_owned()));
        }
        y
    }

    /// `X^{-1} B` column by column.
    pub fn solve_spd_mat(&self, b: &DMat) -> DMat {
        let mut y = DMat::zeros(b.nrows(), b.ncols());
        for c in 0..b.ncols() {
            y.set_column(c, &self.solve_spd(&b.column(c).clone_owned()));
        }
        y
    }
}
