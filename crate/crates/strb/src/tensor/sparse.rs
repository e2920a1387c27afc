//! Compressed-sparse-row matrices.
//!
//! Assembly produces unordered coordinate triplets with repeats; finalization
//! sums duplicates and compresses to CSR. Explicitly stored zeros are kept,
//! so a finalized matrix can faithfully round-trip a file that contains them.

use super::{Result, TensorError};
use crate::{DMat, DVec};

/// Immutable CSR matrix of `f64`.
///
/// Invariants: column indices within each row are strictly increasing (hence
/// no duplicates), `row_ptr` has `rows + 1` monotone entries, and every index
/// is in range.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from coordinate triplets, summing duplicates.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= rows || j >= cols {
                return Err(TensorError::IndexOutOfBounds { row: i, col: j, rows, cols });
            }
        }
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_unstable_by_key(|&t| (triplets[t].0, triplets[t].1));

        let mut row_ptr = Vec::with_capacity(rows + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut cur_row = 0usize;
        let mut last: Option<(usize, usize)> = None;
        for &t in &order {
            let (i, j, v) = triplets[t];
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            while cur_row < i {
                row_ptr.push(col_idx.len());
                cur_row += 1;
            }
            col_idx.push(j);
            values.push(v);
            last = Some((i, j));
        }
        while cur_row < rows {
            row_ptr.push(col_idx.len());
            cur_row += 1;
        }
        Ok(Self { rows, cols, row_ptr, col_idx, values })
    }

    /// Identity matrix of size `n`.
    pub fn identity(n: usize) -> Self {
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        Self::from_triplets(n, n, &triplets).expect("identity triplets are in range")
    }

    /// Diagonal matrix from a vector.
    pub fn from_diagonal(d: &DVec) -> Self {
        let triplets: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triplets(d.len(), d.len(), &triplets).expect("diagonal triplets are in range")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at `(i, j)`, zero if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries as `(row, col, value)`.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// y = A x.
    pub fn matvec(&self, x: &DVec) -> DVec {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut y = DVec::zeros(self.rows);
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&j, &v) in cols.iter().zip(vals) {
                acc += v * x[j];
            }
            y[i] = acc;
        }
        y
    }

    /// y = Aᵀ x.
    pub fn tr_matvec(&self, x: &DVec) -> DVec {
        assert_eq!(x.len(), self.rows, "tr_matvec dimension mismatch");
        let mut y = DVec::zeros(self.cols);
        for i in 0..self.rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                y[j] += v * x[i];
            }
        }
        y
    }

    /// Y = A X for dense X, column by column.
    pub fn matmul_dense(&self, x: &DMat) -> DMat {
        assert_eq!(x.nrows(), self.cols, "matmul dimension mismatch");
        let mut y = DMat::zeros(self.rows, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            for i in 0..self.rows {
                let (cols, vals) = self.row(i);
                let mut acc = 0.0;
                for (&j, &v) in cols.iter().zip(vals) {
                    acc += v * xc[j];
                }
                y[(i, c)] = acc;
            }
        }
        y
    }

    /// Y = Aᵀ X for dense X.
    pub fn tr_matmul_dense(&self, x: &DMat) -> DMat {
        assert_eq!(x.nrows(), self.rows, "tr_matmul dimension mismatch");
        let mut y = DMat::zeros(self.cols, x.ncols());
        for c in 0..x.ncols() {
            let xc = x.column(c);
            for i in 0..self.rows {
                let (cols, vals) = self.row(i);
                for (&j, &v) in cols.iter().zip(vals) {
                    y[(j, c)] += v * xc[i];
                }
            }
        }
        y
    }

    /// xᵀ A y.
    pub fn bilinear(&self, x: &DVec, y: &DVec) -> f64 {
        x.dot(&self.matvec(y))
    }

    pub fn to_dense(&self) -> DMat {
        let mut a = DMat::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            a[(i, j)] += v;
        }
        a
    }

    pub fn transpose(&self) -> Self {
        let triplets: Vec<_> = self.iter().map(|(i, j, v)| (j, i, v)).collect();
        Self::from_triplets(self.cols, self.rows, &triplets).expect("transposed indices in range")
    }

    /// Main diagonal as a vector (square matrices).
    pub fn diagonal(&self) -> DVec {
        assert_eq!(self.rows, self.cols, "diagonal of a non-square matrix");
        DVec::from_fn(self.rows, |i, _| self.get(i, i))
    }

    /// alpha·A + beta·B with identical shapes.
    pub fn linear_combination(a: &Self, alpha: f64, b: &Self, beta: f64) -> Result<Self> {
        if a.rows != b.rows || a.cols != b.cols {
            return Err(TensorError::DimensionMismatch {
                context: format!(
                    "linear combination of {}x{} and {}x{}",
                    a.rows, a.cols, b.rows, b.cols
                ),
            });
        }
        let mut triplets: Vec<_> = a.iter().map(|(i, j, v)| (i, j, alpha * v)).collect();
        triplets.extend(b.iter().map(|(i, j, v)| (i, j, beta * v)));
        Self::from_triplets(a.rows, a.cols, &triplets)
    }

    /// Stacks blocks vertically; every block must have the same column count.
    pub fn vstack(blocks: &[&Self]) -> Result<Self> {
        let cols = blocks.first().map_or(0, |b| b.cols);
        if blocks.iter().any(|b| b.cols != cols) {
            return Err(TensorError::DimensionMismatch {
                context: "vertical stack of blocks with unequal column counts".into(),
            });
        }
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for b in blocks {
            let base = *row_ptr.last().expect("row_ptr never empty");
            row_ptr.extend(b.row_ptr[1..].iter().map(|p| base + p));
            col_idx.extend_from_slice(&b.col_idx);
            values.extend_from_slice(&b.values);
        }
        Ok(SparseMatrix {
            rows: row_ptr.len() - 1,
            cols,
            row_ptr,
            col_idx,
            values,
        })
    }

    /// Largest absolute deviation from symmetry, with its index pair.
    pub fn symmetry_deviation(&self) -> (f64, usize, usize) {
        let mut worst = (0.0f64, 0usize, 0usize);
        for (i, j, v) in self.iter() {
            let dev = (v - self.get(j, i)).abs();
            if dev > worst.0 {
                worst = (dev, i.min(j), i.max(j));
            }
        }
        worst
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Returns a copy with row `i` replaced by `scale·eᵢᵀ` for each listed row.
    ///
    /// Used for strong Dirichlet rows; columns of other rows are untouched.
    pub fn with_rows_replaced_by_scaled_identity(&self, rows: &[usize], scale: f64) -> Self {
        let mut flags = vec![false; self.rows];
        for &r in rows {
            flags[r] = true;
        }
        let mut triplets: Vec<_> =
            self.iter().filter(|&(i, _, _)| !flags[i]).collect();
        triplets.extend(rows.iter().map(|&r| (r, r, scale)));
        Self::from_triplets(self.rows, self.cols, &triplets).expect("indices unchanged")
    }

    /// Returns a copy with every listed row zeroed out (structurally removed).
    pub fn with_rows_zeroed(&self, rows: &[usize]) -> Self {
        let mut flags = vec![false; self.rows];
        for &r in rows {
            flags[r] = true;
        }
        let triplets: Vec<_> = self.iter().filter(|&(i, _, _)| !flags[i]).collect();
        Self::from_triplets(self.rows, self.cols, &triplets).expect("indices unchanged")
    }
}
