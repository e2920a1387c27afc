//! Third-order tensors and their mode unfoldings.
//!
//! Layout is fixed: entry `(i, j, k)` lives at `i + d1*(j + d2*k)` — the first
//! index is fastest, the third slowest. Unfolding fibers inherit that order,
//! so the mode-1 unfolding is a zero-copy reinterpretation of the buffer.

use super::{Result, TensorError};
use crate::DMat;

/// Dense third-order tensor of `f64` with the fixed layout above.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor3 {
    dims: (usize, usize, usize),
    data: Vec<f64>,
}

impl Tensor3 {
    pub fn zeros(d1: usize, d2: usize, d3: usize) -> Self {
        Self { dims: (d1, d2, d3), data: vec![0.0; d1 * d2 * d3] }
    }

    /// Builds from a raw buffer already in layout order.
    pub fn from_raw(dims: (usize, usize, usize), data: Vec<f64>) -> Result<Self> {
        if data.len() != dims.0 * dims.1 * dims.2 {
            return Err(TensorError::DimensionMismatch {
                context: format!(
                    "tensor buffer of length {} for dims {}x{}x{}",
                    data.len(),
                    dims.0,
                    dims.1,
                    dims.2
                ),
            });
        }
        Ok(Self { dims, data })
    }

    pub fn from_fn(
        d1: usize,
        d2: usize,
        d3: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut t = Self::zeros(d1, d2, d3);
        for k in 0..d3 {
            for j in 0..d2 {
                for i in 0..d1 {
                    t.set(i, j, k, f(i, j, k));
                }
            }
        }
        t
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        i + self.dims.0 * (j + self.dims.1 * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let o = self.offset(i, j, k);
        self.data[o] = v;
    }

    /// Writes slice `(:, :, k)` from a `d1 x d2` matrix.
    pub fn set_slab(&mut self, k: usize, slab: &DMat) {
        assert_eq!((slab.nrows(), slab.ncols()), (self.dims.0, self.dims.1), "slab shape");
        for j in 0..self.dims.1 {
            for i in 0..self.dims.0 {
                self.set(i, j, k, slab[(i, j)]);
            }
        }
    }

    /// Mode-1 unfolding: `d1 x (d2*d3)`, column `(j, k) -> j + d2*k`.
    pub fn mode1_unfold(&self) -> DMat {
        DMat::from_column_slice(self.dims.0, self.dims.1 * self.dims.2, &self.data)
    }

    /// Mode-2 unfolding: `d2 x (d1*d3)`, column `(i, k) -> i + d1*k`.
    pub fn mode2_unfold(&self) -> DMat {
        let (d1, d2, d3) = self.dims;
        let mut m = DMat::zeros(d2, d1 * d3);
        for k in 0..d3 {
            for i in 0..d1 {
                let c = i + d1 * k;
                for j in 0..d2 {
                    m[(j, c)] = self.get(i, j, k);
                }
            }
        }
        m
    }

    /// Unfolds along `mode` (1 or 2).
    pub fn mode_unfold(&self, mode: usize) -> Result<DMat> {
        match mode {
            1 => Ok(self.mode1_unfold()),
            2 => Ok(self.mode2_unfold()),
            m => Err(TensorError::DimensionMismatch {
                context: format!("unfolding mode {m}; only modes 1 and 2 exist"),
            }),
        }
    }

    /// Inverse of [`Self::mode1_unfold`].
    pub fn refold_mode1(m: &DMat, dims: (usize, usize, usize)) -> Result<Self> {
        if m.nrows() != dims.0 || m.ncols() != dims.1 * dims.2 {
            return Err(TensorError::DimensionMismatch {
                context: format!(
                    "mode-1 refold of {}x{} into {}x{}x{}",
                    m.nrows(),
                    m.ncols(),
                    dims.0,
                    dims.1,
                    dims.2
                ),
            });
        }
        Self::from_raw(dims, m.as_slice().to_vec())
    }

    /// Inverse of [`Self::mode2_unfold`].
    pub fn refold_mode2(m: &DMat, dims: (usize, usize, usize)) -> Result<Self> {
        let (d1, d2, d3) = dims;
        if m.nrows() != d2 || m.ncols() != d1 * d3 {
            return Err(TensorError::DimensionMismatch {
                context: format!(
                    "mode-2 refold of {}x{} into {d1}x{d2}x{d3}",
                    m.nrows(),
                    m.ncols()
                ),
            });
        }
        let mut t = Self::zeros(d1, d2, d3);
        for k in 0..d3 {
            for i in 0..d1 {
                let c = i + d1 * k;
                for j in 0..d2 {
                    t.set(i, j, k, m[(j, c)]);
                }
            }
        }
        Ok(t)
    }
}
