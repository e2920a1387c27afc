//! Folds supremizers into the velocity basis, orthonormally in its norm.
//!
//! The retained reduced-basis columns pass through verbatim; supremizer
//! candidates are orthogonalized against everything accepted so far by
//! modified Gram-Schmidt with one re-orthogonalization pass, working on the
//! Cholesky-weighted images so the velocity-norm geometry becomes Euclidean.
//! A candidate whose residual drops below `1e-12` times its original norm is
//! already represented and is discarded rather than normalized into noise.

use super::supremizer::SupremizerSet;
use super::{Result, StabilityError};
use crate::pod::{FieldTag, SpaceBasis};
use crate::tensor::{cholesky, SparseMatrix, TensorError};
use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};

/// Residual fraction below which a candidate counts as dependent.
const DROP_TOLERANCE: f64 = 1e-12;

/// Where an enriched-basis column came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnSource {
    Pod,
    PressureSupremizer,
    MultiplierSupremizer(u8),
}

/// Velocity basis after supremizer enrichment, with per-column provenance.
#[derive(Debug, Clone)]
pub struct EnrichedSpaceBasis {
    pub phi: DMat,
    pub provenance: Vec<ColumnSource>,
    /// Candidates discarded as dependent.
    pub dropped: usize,
}

impl EnrichedSpaceBasis {
    pub fn n_modes(&self) -> usize {
        self.phi.ncols()
    }

    /// Columns that survive beyond the original basis.
    pub fn added(&self) -> usize {
        self.provenance.iter().filter(|s| **s != ColumnSource::Pod).count()
    }

    /// Repackages the enriched columns under the original basis metadata.
    /// The singular values keep describing the unenriched part only; the
    /// appended columns carry no decay information.
    pub fn into_space_basis(self, original: &SpaceBasis) -> SpaceBasis {
        SpaceBasis {
            phi: self.phi,
            norm: original.norm,
            sigma: original.sigma.clone(),
            spectrum: original.spectrum.clone(),
            truncation: original.truncation,
        }
    }
}

/// Appends supremizer directions to `basis`, keeping the result orthonormal
/// in the norm `x_u`. Sets are processed in the order given, columns within a
/// set in dual-mode order.
pub fn enrich_space_basis(
    basis: &SpaceBasis,
    supremizers: &[SupremizerSet],
    x_u: &SparseMatrix,
) -> Result<EnrichedSpaceBasis> {
    if basis.phi.nrows() != x_u.rows() {
        return Err(dimension_error("velocity basis", basis.phi.nrows(), x_u.rows()));
    }
    let factor = cholesky(x_u)?;
    // `mapped` holds the Cholesky-weighted, unit-norm images of the accepted
    // columns; `columns` the accepted columns themselves.
    let mut mapped: Vec<DVec> = Vec::with_capacity(basis.phi.ncols());
    let mut columns: Vec<DVec> = Vec::with_capacity(basis.phi.ncols());
    let mut provenance = Vec::with_capacity(basis.phi.ncols());
    for c in 0..basis.phi.ncols() {
        let v = basis.phi.column(c).into_owned();
        let mut w = factor.apply(&v);
        let n = w.norm();
        if n == 0.0 {
            return Err(StabilityError::DegenerateEnrichment { residual: 0.0 });
        }
        w /= n;
        mapped.push(w);
        columns.push(v);
        provenance.push(ColumnSource::Pod);
    }
    let mut dropped = 0usize;
    for set in supremizers {
        if set.vectors().nrows() != x_u.rows() {
            return Err(dimension_error("supremizer set", set.vectors().nrows(), x_u.rows()));
        }
        let source = match set.kind() {
            FieldTag::Pressure => ColumnSource::PressureSupremizer,
            FieldTag::Multiplier(k) => ColumnSource::MultiplierSupremizer(k),
            FieldTag::Velocity => return Err(StabilityError::WrongField(FieldTag::Velocity)),
        };
        for c in 0..set.count() {
            let v = set.vectors().column(c).into_owned();
            let mut w = factor.apply(&v);
            let original = w.norm();
            for _ in 0..2 {
                for q in &mapped {
                    let coeff = q.dot(&w);
                    w.axpy(-coeff, q, 1.0);
                }
            }
            let n = w.norm();
            if original == 0.0 || n < DROP_TOLERANCE * original {
                dropped += 1;
                continue;
            }
            w /= n;
            columns.push(factor.solve_upper(&w));
            mapped.push(w);
            provenance.push(source);
        }
    }
    Ok(EnrichedSpaceBasis { phi: DMat::from_columns(&columns), provenance, dropped })
}

fn dimension_error(what: &str, got: usize, expected: usize) -> StabilityError {
    TensorError::DimensionMismatch {
        context: format!("{what} has {got} rows, velocity norm has {expected}"),
    }
    .into()
}
