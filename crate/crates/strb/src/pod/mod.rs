//! Snapshot organization and proper orthogonal decomposition in space and
//! time, producing the factored space-time trial basis.
//!
//! Spatial bases are orthonormal in the energy norm of their field: the
//! mode-1 unfolding of the snapshot tensor is weighted by the upper
//! Cholesky factor `H` of the norm matrix, decomposed in the Euclidean
//! sense, and the left singular vectors are pulled back through `H^{-1}`.
//! Temporal bases come from the plain SVD of the mode-2 unfolding. The
//! space-time basis itself is never stored as a matrix: each of its columns
//! is the pairing of one spatial and one temporal mode, numbered
//! time-fastest, and reconstruction works directly on the factors. The
//! multiplier field keeps the identity as its spatial basis, one temporal
//! basis per constrained boundary.
//!
//! Every computed basis vector has its sign normalized so the
//! largest-magnitude entry is positive. The decompositions underneath are
//! sign-indeterminate; pinning the sign makes offline artifacts
//! reproducible byte for byte across runs.

mod basis;
mod snapshots;
mod spacetime;

pub use basis::{spatial_pod, spatial_pod_with, temporal_pod, NormTag, SpaceBasis, TimeBasis};
pub use snapshots::{split_fields, FieldSnapshots, FieldTag, SnapshotTensor};
pub use spacetime::{
    assemble_space_time_basis, trajectory_norm, SpaceTimeBasis, SpaceTimeFields,
};

use crate::tensor::TensorError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PodError {
    #[error("{count} trajectories for {parameters} parameter vectors")]
    ParameterCount { count: usize, parameters: usize },
    #[error(
        "trajectory {index} is {rows}x{cols}, expected {expected_rows}x{expected_cols}"
    )]
    TrajectoryShape {
        index: usize,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("norm factor is {factor}-dimensional, snapshots have {rows} spatial unknowns")]
    NormDimension { factor: usize, rows: usize },
    #[error("{part} basis is empty")]
    EmptyBasis { part: &'static str },
    #[error("temporal bases disagree on the step count: found {found}, expected {expected}")]
    StepMismatch { expected: usize, found: usize },
    #[error("{dims} multiplier block sizes for {bases} temporal bases")]
    MultiplierCount { dims: usize, bases: usize },
    #[error("reduced coefficient vector has length {found}, basis spans {expected}")]
    CoefficientLength { expected: usize, found: usize },
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("basis artifact: {0}")]
    Io(#[from] std::io::Error),
    #[error("basis sidecar: {0}")]
    Sidecar(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, PodError>;
