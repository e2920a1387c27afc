//! Inf-sup stabilization of the reduced spaces.
//!
//! A reduced saddle problem inherits stability from the full model only if
//! the trial spaces are compatible: the velocity space must contain, for
//! every pressure and trace-multiplier mode, a direction realizing its
//! coupling supremum, and the velocity time basis must not be rank-deficient
//! against the dual time bases. This module provides both repairs. In space,
//! supremizers are computed one per dual mode and folded into the velocity
//! basis by a Gram-Schmidt pass in the velocity norm, with provenance
//! recorded per column. In time, a greedy scan enriches the velocity time
//! basis with dual modes whose coupling onto the current basis is nearly
//! dependent, restarting the scan after every addition. Rank diagnostics
//! quantify the coupling conditioning so a caller can tell whether a given
//! reduced problem is safe to assemble.

mod enrich;
mod supremizer;
mod temporal;

pub use enrich::{enrich_space_basis, ColumnSource, EnrichedSpaceBasis};
pub use supremizer::{multiplier_supremizers, pressure_supremizers, SupremizerSet};
pub use temporal::{
    coupling_sigma_min, rank_diagnostics, temporal_enrich, temporal_enrich_all, RankDiagnostics,
    TemporalEnrichmentReport, RANK_TOLERANCE,
};

use crate::pod::FieldTag;
use crate::tensor::TensorError;
use thiserror::Error;

/// Errors raised while stabilizing the reduced spaces.
#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("supremizer saddle system is singular; the trace operator has dependent rows")]
    SingularSaddle,
    #[error("enrichment candidate lies in the span of the current basis (residual {residual:e})")]
    DegenerateEnrichment { residual: f64 },
    #[error("{which} is not orthonormal: Gram deviation {deviation:e}")]
    NotOrthonormal { which: &'static str, deviation: f64 },
    #[error("boundary {boundary} out of range; the model constrains {count} boundaries")]
    BoundaryRange { boundary: u8, count: usize },
    #[error("time bases have different step counts: {expected} vs {found}")]
    StepMismatch { expected: usize, found: usize },
    #[error("supremizer sets must target a constraint field, got {0}")]
    WrongField(FieldTag),
    #[error("enrichment tolerance must be positive and finite, got {0}")]
    BadTolerance(f64),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

pub type Result<T> = std::result::Result<T, StabilityError>;
