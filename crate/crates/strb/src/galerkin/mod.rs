//! Galerkin-reduced solvers: the all-at-once space-time system and the
//! space-only marched baseline.
//!
//! Both routes share one offline compression of the spatial blocks onto the
//! reduced velocity and pressure spaces (the multiplier keeps its identity
//! basis, so its couplings keep their full trace dimension). The space-time
//! route additionally contracts the temporal direction: every operator block
//! becomes a Kronecker pairing of a small spatial matrix with a temporal
//! coupling — an identity, a shifted Gramian encoding the two-step history,
//! or a cross-Gramian between time bases — and one parameter query costs a
//! projected load vector plus a dense solve. The baseline instead marches
//! the reduced saddle step by step, factoring its step matrix once.
//!
//! Nothing assembled here depends on the parameters; they enter only through
//! the boundary waveform on the right-hand side. The compressed operator
//! inherits the one-sidedness of the wall treatment (the pressure-gradient
//! and trace blocks carry it, their counterparts project the raw couplings),
//! so no block is symmetrized.

mod srbtfo;
mod stgrb;

pub use srbtfo::{solve_srbtfo, SpaceReducedTrajectory};
pub use stgrb::{assemble_stgrb, online_rhs_stgrb, solve_stgrb, ReducedGalerkinSystem};

use crate::fom::{FomError, FomSpatialBlocks};
use crate::pod::{PodError, SpaceTimeBasis, SpaceTimeFields};
use crate::tensor::TensorError;
use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};
use std::ops::Range;
use thiserror::Error;

/// Condition-estimate ceiling past which a reduced solve is refused.
pub const CONDITION_LIMIT: f64 = 1e14;

/// Largest relative residual a reduced solve may leave behind before the
/// solution is considered untrustworthy.
pub const RESIDUAL_LIMIT: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum GalerkinError {
    #[error(
        "reduced system is singular or near-singular (condition estimate {estimate:.3e}); \
         run the coupling rank diagnostics — a rank-deficient pairing between the velocity \
         basis and a constraint basis, in space (missing supremizers) or in time (missing \
         temporal enrichment), makes the reduced operator structurally singular"
    )]
    IllConditioned { estimate: f64 },
    #[error(
        "reduced solve left relative residual {residual:.3e}, above the trusted bound; \
         run the coupling rank diagnostics before using this basis"
    )]
    UnreliableSolve { residual: f64 },
    #[error(transparent)]
    Fom(#[from] FomError),
    #[error(transparent)]
    Pod(#[from] PodError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, GalerkinError>;

fn dimension_error(context: String) -> GalerkinError {
    GalerkinError::Tensor(TensorError::DimensionMismatch { context })
}

/// Adds `scale * kron(s, t)` into `dst` at block offset `(r0, c0)`. Row
/// `(i, r)` of the product is `r0 + i * t.nrows() + r`, columns likewise —
/// the time-fastest numbering of the reduced unknowns.
pub(crate) fn kron_into(dst: &mut DMat, r0: usize, c0: usize, s: &DMat, t: &DMat, scale: f64) {
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            let sv = scale * s[(i, j)];
            if sv == 0.0 {
                continue;
            }
            for r in 0..t.nrows() {
                for c in 0..t.ncols() {
                    dst[(r0 + i * t.nrows() + r, c0 + j * t.ncols() + c)] += sv * t[(r, c)];
                }
            }
        }
    }
}

/// Column partition of the reduced space-time unknown vector: velocity
/// pairings first, then pressure, then one block per constrained boundary.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedLayout {
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Columns of each multiplier block — spatial size times temporal modes.
    pub multiplier: Vec<usize>,
}

impl ReducedLayout {
    pub fn from_basis(bases: &SpaceTimeBasis) -> Self {
        ReducedLayout {
            n_velocity: bases.velocity_count(),
            n_pressure: bases.pressure_count(),
            multiplier: (0..bases.multiplier_dims.len()).map(|i| bases.multiplier_count(i)).collect(),
        }
    }

    pub fn total(&self) -> usize {
        self.n_velocity + self.n_pressure + self.multiplier.iter().sum::<usize>()
    }

    pub fn velocity_range(&self) -> Range<usize> {
        0..self.n_velocity
    }

    pub fn pressure_range(&self) -> Range<usize> {
        self.n_velocity..self.n_velocity + self.n_pressure
    }

    /// All multiplier columns, boundary blocks back to back.
    pub fn multiplier_range(&self) -> Range<usize> {
        self.pressure_range().end..self.total()
    }

    /// Columns of boundary block `idx` (0-based).
    pub fn multiplier_block_range(&self, idx: usize) -> Range<usize> {
        let start = self.pressure_range().end + self.multiplier[..idx].iter().sum::<usize>();
        start..start + self.multiplier[idx]
    }
}

/// Reduced space-time solution together with its field partition.
#[derive(Debug, Clone)]
pub struct RomSolution {
    w_hat: DVec,
    layout: ReducedLayout,
}

impl RomSolution {
    pub(crate) fn new(w_hat: DVec, layout: ReducedLayout) -> Self {
        debug_assert_eq!(w_hat.len(), layout.total());
        RomSolution { w_hat, layout }
    }

    pub fn coefficients(&self) -> &DVec {
        &self.w_hat
    }

    pub fn layout(&self) -> &ReducedLayout {
        &self.layout
    }
}

/// Expands a reduced solution into per-field trajectories through the basis
/// factors; the basis columns are never assembled into one matrix.
pub fn reconstruct(solution: &RomSolution, bases: &SpaceTimeBasis) -> Result<SpaceTimeFields> {
    if solution.layout != ReducedLayout::from_basis(bases) {
        return Err(dimension_error(
            "solution partition does not match the basis block structure".into(),
        ));
    }
    Ok(bases.reconstruct(&solution.w_hat)?)
}

/// Reduced load vector for one parameter query. Queries outside the training
/// box are answered, merely marked.
#[derive(Debug, Clone)]
pub struct OnlineRhs {
    pub f_hat: DVec,
    pub extrapolated: bool,
}

/// Spatial operator blocks compressed onto the reduced velocity and pressure
/// spaces. The trace couplings keep their full multiplier dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceReducedBlocks {
    pub m: DMat,
    pub a: DMat,
    /// Divergence rows against reduced pressures.
    pub b: DMat,
    /// Pressure gradient with the wall treatment, tested against reduced
    /// velocities — not the transpose of `b`.
    pub bt: DMat,
    pub c: DMat,
    pub ct: DMat,
}

/// Projects the spatial blocks onto the given mode matrices.
pub fn project_spatial_blocks(
    blocks: &FomSpatialBlocks,
    phi_u: &DMat,
    phi_p: &DMat,
) -> Result<SpaceReducedBlocks> {
    if phi_u.nrows() != blocks.n_u {
        return Err(dimension_error(format!(
            "velocity basis has {} rows, the model {} velocity unknowns",
            phi_u.nrows(),
            blocks.n_u
        )));
    }
    if phi_p.nrows() != blocks.n_p {
        return Err(dimension_error(format!(
            "pressure basis has {} rows, the model {} pressure unknowns",
            phi_p.nrows(),
            blocks.n_p
        )));
    }
    Ok(SpaceReducedBlocks {
        m: phi_u.transpose() * blocks.m.matmul_dense(phi_u),
        a: phi_u.transpose() * blocks.a.matmul_dense(phi_u),
        b: phi_p.transpose() * blocks.b.matmul_dense(phi_u),
        bt: phi_u.transpose() * blocks.bt_bc.matmul_dense(phi_p),
        c: blocks.c.matmul_dense(phi_u),
        ct: blocks.ct_bc.tr_matmul_dense(phi_u).transpose(),
    })
}
