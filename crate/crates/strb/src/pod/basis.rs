//! Energy-norm spatial POD and Euclidean temporal POD.

use super::{PodError, Result, SnapshotTensor};
use crate::tensor::{cholesky, truncated_svd, CholeskyFactor, SparseMatrix, Truncation};
use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};

/// Which inner product a spatial basis is orthonormal in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormTag {
    /// Velocity energy norm (mass plus half-viscous stiffness).
    Velocity,
    /// Pressure mass-matrix norm.
    Pressure,
    /// Plain Euclidean norm.
    Euclidean,
}

/// Spatial reduced basis: columns orthonormal in the tagged norm.
#[derive(Debug, Clone)]
pub struct SpaceBasis {
    /// One mode per column, unknowns by modes.
    pub phi: DMat,
    pub norm: NormTag,
    /// Singular values of the retained modes, nonincreasing.
    pub sigma: DVec,
    /// The full singular spectrum, for energy accounting.
    pub spectrum: DVec,
    pub truncation: Truncation,
}

impl SpaceBasis {
    pub fn n_modes(&self) -> usize {
        self.phi.ncols()
    }

    /// Fraction of total squared spectrum carried by the retained modes.
    pub fn retained_energy(&self) -> f64 {
        retained_energy(&self.sigma, &self.spectrum)
    }
}

/// Temporal reduced basis: columns Euclidean-orthonormal.
#[derive(Debug, Clone)]
pub struct TimeBasis {
    /// One mode per column, steps by modes.
    pub psi: DMat,
    pub sigma: DVec,
    pub spectrum: DVec,
    pub truncation: Truncation,
}

impl TimeBasis {
    pub fn n_modes(&self) -> usize {
        self.psi.ncols()
    }

    pub fn n_steps(&self) -> usize {
        self.psi.nrows()
    }

    pub fn retained_energy(&self) -> f64 {
        retained_energy(&self.sigma, &self.spectrum)
    }
}

fn retained_energy(sigma: &DVec, spectrum: &DVec) -> f64 {
    let total: f64 = spectrum.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return 1.0;
    }
    sigma.iter().map(|s| s * s).sum::<f64>() / total
}

/// Spatial POD of a snapshot tensor in the norm `x`.
///
/// Factors `x = H^T H` first; fails if `x` is not symmetric positive
/// definite. The basis solves the rank-constrained best-approximation
/// problem in the `x`-norm over all snapshots jointly.
pub fn spatial_pod(
    chi: &SnapshotTensor,
    x: &SparseMatrix,
    norm: NormTag,
    truncation: Truncation,
) -> Result<SpaceBasis> {
    let factor = cholesky(x)?;
    spatial_pod_with(chi, &factor, norm, truncation)
}

/// Same as [`spatial_pod`] with the norm already factored, for callers that
/// reuse the factor across several constructions.
pub fn spatial_pod_with(
    chi: &SnapshotTensor,
    factor: &CholeskyFactor,
    norm: NormTag,
    truncation: Truncation,
) -> Result<SpaceBasis> {
    let rows = chi.dims().0;
    if factor.dim() != rows {
        return Err(PodError::NormDimension { factor: factor.dim(), rows });
    }
    // Weighting by H turns the x-norm problem into a Euclidean one; the
    // pullback through H^{-1} restores x-orthonormality of the modes.
    let weighted = factor.h() * chi.data().mode1_unfold();
    let svd = truncated_svd(&weighted, truncation)?;
    let mut phi = factor.solve_upper_mat(&svd.u);
    fix_signs(&mut phi);
    Ok(SpaceBasis { phi, norm, sigma: svd.sigma, spectrum: svd.spectrum, truncation })
}

/// Temporal POD: Euclidean SVD of the mode-2 unfolding.
pub fn temporal_pod(chi: &SnapshotTensor, truncation: Truncation) -> Result<TimeBasis> {
    let svd = truncated_svd(&chi.data().mode2_unfold(), truncation)?;
    let mut psi = svd.u;
    fix_signs(&mut psi);
    Ok(TimeBasis { psi, sigma: svd.sigma, spectrum: svd.spectrum, truncation })
}

/// Flips each column so its largest-magnitude entry is positive; ties go to
/// the lowest index. Removes the sign freedom of the decomposition.
fn fix_signs(m: &mut DMat) {
    for c in 0..m.ncols() {
        let mut lead = 0;
        let mut lead_abs = 0.0;
        for r in 0..m.nrows() {
            let a = m[(r, c)].abs();
            if a > lead_abs {
                lead_abs = a;
                lead = r;
            }
        }
        if m[(lead, c)] < 0.0 {
            m.column_mut(c).scale_mut(-1.0);
        }
    }
}
