//! Desk-scale full-order model: 2D Taylor–Hood Stokes flow in a channel or
//! symmetric T-junction, with inflow data imposed weakly through Lagrange
//! multipliers and no-slip walls imposed strongly by row replacement.
//!
//! The model deliberately keeps the block convention its reduced-order
//! consumers rely on: after wall treatment the pressure and trace coupling
//! blocks that appear in the momentum rows are *not* the transposes of the
//! constraint rows, so every downstream solver carries `Bᵀ_bc`/`Cᵀ_bc`
//! separately from `B`/`C`. Time discretization is BDF2 with zero initial
//! history; the same step data can be marched sequentially or viewed as one
//! monolithic space–time operator held in factored (block-structural) form.

mod assemble;
mod datum;
mod march;
mod mesh;
mod multiplier;
mod quad;
mod spacetime;

pub use assemble::{assemble_fom, inf_sup_sigma_min, FomSpatialBlocks};
pub use datum::{temporal_profile, DirichletDatum, ParameterVector, WeightLaw, PARAMETER_DOMAIN};
pub use march::{bdf2_march, bdf2_march_with, steady_solve, TimeGrid};
pub use mesh::{BoundaryEdge, BoundaryTag, Mesh2D};
pub use multiplier::TraceBasis;
pub use quad::{gauss_legendre, TRIANGLE_DEGREE4};
pub use spacetime::{assemble_space_time, SpaceTimeSystem};

use crate::tensor::TensorError;
use thiserror::Error;

/// Failure modes of meshing, assembly, and time marching.
#[derive(Debug, Error)]
pub enum FomError {
    #[error("triangle {index} is degenerate or clockwise (signed area {area:.3e})")]
    DegenerateTriangle { index: usize, area: f64 },
    #[error("boundary edge ({a}, {b}) carries no tag")]
    UntaggedBoundaryEdge { a: usize, b: usize },
    #[error("tagged edge ({a}, {b}) is not a boundary edge of the triangulation")]
    NotABoundaryEdge { a: usize, b: usize },
    #[error("boundary edge ({a}, {b}) is tagged more than once")]
    DuplicateTag { a: usize, b: usize },
    #[error("mesh is not conforming: edge ({a}, {b}) is shared by {count} triangles")]
    NonConforming { a: usize, b: usize, count: usize },
    #[error("inflow boundaries must be numbered consecutively from 1, found IN_{found}")]
    BoundaryNumbering { found: u8 },
    #[error("multiplier boundary IN_{boundary} is not a straight segment")]
    CurvedBoundary { boundary: u8 },
    #[error("step matrix is numerically singular (condition estimate {estimate:.3e})")]
    SingularStepMatrix { estimate: f64 },
    #[error("{0}")]
    BadParameter(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("mesh format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, FomError>;
