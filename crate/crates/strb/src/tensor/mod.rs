//! Dense/sparse linear algebra and third-order tensor utilities.
//!
//! Everything downstream — assembly, POD, reduced solvers — is built on the
//! handful of kernels here: compressed-sparse-row matrices with Matrix Market
//! I/O, truncated SVD with an energy-based cut, dense Cholesky factorization
//! exposing the upper factor, mode unfoldings of snapshot tensors, and the
//! shifted Gramians that encode multistep history couplings on a time basis.
//!
//! All types are immutable after construction and all operations are pure,
//! so they can be used freely from concurrent workers.

mod chol;
mod gram;
mod io;
mod sparse;
mod svd;
mod tensor3;

pub use chol::{cholesky, CholeskyFactor};
pub use gram::{cross_shifted_gramian, shifted_gramian};
pub use io::{
    read_dense, read_sparse_matrix_market, read_tensor3, write_dense, write_sparse_matrix_market,
    write_tensor3,
};
pub use sparse::SparseMatrix;
pub use svd::{truncated_svd, SvdResult, Truncation};
#[cfg(test)]
pub(crate) use svd::orthonormalize_columns;
pub use tensor3::Tensor3;

use thiserror::Error;

/// Errors raised by the linear-algebra and I/O kernels.
#[derive(Debug, Error)]
pub enum TensorError {
    #[error("empty matrix ({rows}x{cols}) where a nonempty one is required")]
    Empty { rows: usize, cols: usize },
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: entries ({i},{j})/({j},{i}) differ by {deviation:e}")]
    NotSymmetric { i: usize, j: usize, deviation: f64 },
    #[error("Cholesky pivot {index} is non-positive ({value:e}); matrix is not positive definite")]
    NonPositivePivot { index: usize, value: f64 },
    #[error("shift {shift} out of range for a time basis with {rows} rows")]
    ShiftOutOfRange { shift: usize, rows: usize },
    #[error("entry index ({row},{col}) out of bounds for a {rows}x{cols} matrix")]
    IndexOutOfBounds { row: usize, col: usize, rows: usize, cols: usize },
    #[error("energy tolerance must lie in (0,1), got {0}")]
    BadTolerance(f64),
    #[error("dimension mismatch: {context}")]
    DimensionMismatch { context: String },
    #[error("singular-value decomposition did not converge")]
    SvdFailed,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, TensorError>;

/// Order-of-magnitude condition estimate from the LU diagonal ratio.
pub(crate) fn lu_condition_estimate(lu: &nalgebra::linalg::LU<f64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..u.nrows().min(u.ncols()) {
        let d = u[(i, i)].abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

/// Rejects matrices the decomposition kernels cannot accept.
pub(crate) fn check_finite(a: &crate::DMat) -> Result<()> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Err(TensorError::Empty { rows: a.nrows(), cols: a.ncols() });
    }
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            if !a[(i, j)].is_finite() {
                return Err(TensorError::NonFinite { row: i, col: j });
            }
        }
    }
    Ok(())
}
