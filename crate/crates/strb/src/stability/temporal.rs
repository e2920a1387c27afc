//! Greedy temporal enrichment and coupling-rank diagnostics.
//!
//! The reduced problem couples the velocity time basis to each dual time
//! basis through the matrix `Xi = Psi_u^T Psi_d`. If any `Xi` is
//! rank-deficient, dual modes exist that the velocity basis cannot test and
//! the reduced system is singular. The enrichment scans the dual columns of
//! `Xi` with a Gram-Schmidt sweep: a column whose deflated residual falls to
//! the tolerance flags a nearly untestable dual mode, whose time profile is
//! then orthonormalized into the velocity basis, and the scan restarts on
//! the recomputed coupling. Columns that pass are deflated in place so later
//! columns are measured against the part of the span not yet accounted for.
//! A full sweep without a trigger ends the procedure.
//!
//! The scan treats the first column as having an empty projection history,
//! so its criterion reduces to its plain norm.

use super::{Result, StabilityError};
use crate::pod::FieldTag;
use crate::tensor::{truncated_svd, TensorError, Truncation};
use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};

/// Smallest coupling singular value considered nonzero.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Orthonormality slack tolerated in the input bases.
const GRAM_TOLERANCE: f64 = 1e-8;

/// Residual below which an enrichment candidate is already represented.
const SPAN_TOLERANCE: f64 = 1e-13;

fn check_orthonormal(m: &DMat, which: &'static str) -> Result<()> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Err(TensorError::Empty { rows: m.nrows(), cols: m.ncols() }.into());
    }
    let n = m.ncols();
    let deviation = (m.transpose() * m - DMat::identity(n, n)).amax();
    if deviation > GRAM_TOLERANCE {
        return Err(StabilityError::NotOrthonormal { which, deviation });
    }
    Ok(())
}

fn append_column(m: DMat, col: &DVec) -> DMat {
    let n = m.ncols();
    let mut bigger = m.insert_column(n, 0.0);
    bigger.set_column(n, col);
    bigger
}

/// Enriches `psi_u` with columns of `psi_d` whose coupling is nearly
/// dependent, returning the grown basis and the number of added columns.
///
/// `eps_t` is the trigger tolerance on the deflated coupling residual.
/// Larger values enrich more aggressively; values of `1` or above force
/// every dual mode in, failing once a candidate lies in the current span.
pub fn temporal_enrich(psi_u: &DMat, psi_d: &DMat, eps_t: f64) -> Result<(DMat, usize)> {
    if !(eps_t > 0.0) || !eps_t.is_finite() {
        return Err(StabilityError::BadTolerance(eps_t));
    }
    check_orthonormal(psi_u, "primal time basis")?;
    check_orthonormal(psi_d, "dual time basis")?;
    if psi_u.nrows() != psi_d.nrows() {
        return Err(StabilityError::StepMismatch {
            expected: psi_u.nrows(),
            found: psi_d.nrows(),
        });
    }
    let mut psi = psi_u.clone();
    let mut added = 0usize;
    'scan: loop {
        let mut xi = psi.transpose() * psi_d;
        for ell in 0..xi.ncols() {
            let column = xi.column(ell).into_owned();
            let mut projection = DVec::zeros(xi.nrows());
            for p in 0..ell {
                let prior = xi.column(p).into_owned();
                let denominator = prior.norm_squared();
                // A fully deflated prior column spans nothing.
                if denominator > 1e-30 {
                    projection.axpy(prior.dot(&column) / denominator, &prior, 1.0);
                }
            }
            let deflated = &column - &projection;
            if deflated.norm() <= eps_t {
                let dual = psi_d.column(ell).into_owned();
                let candidate = &dual - &psi * (psi.transpose() * &dual);
                let residual = candidate.norm();
                if residual < SPAN_TOLERANCE {
                    return Err(StabilityError::DegenerateEnrichment { residual });
                }
                psi = append_column(psi, &(candidate / residual));
                added += 1;
                continue 'scan;
            }
            xi.set_column(ell, &deflated);
        }
        break;
    }
    Ok((psi, added))
}

/// What the enrichment did, per dual field and in processing order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemporalEnrichmentReport {
    /// Columns added while processing each dual field.
    pub added: Vec<(FieldTag, usize)>,
    /// Smallest coupling singular value against the final basis.
    pub sigma_min: Vec<(FieldTag, f64)>,
    pub eps_t: f64,
}

/// Runs [`temporal_enrich`] over several dual fields in the order given,
/// accumulating the basis, then measures every coupling against the final
/// result. The order matters: an addition made for one field changes what
/// later fields see, which the report makes visible.
pub fn temporal_enrich_all(
    psi_u: &DMat,
    duals: &[(FieldTag, &DMat)],
    eps_t: f64,
) -> Result<(DMat, TemporalEnrichmentReport)> {
    let mut psi = psi_u.clone();
    let mut added = Vec::with_capacity(duals.len());
    for (tag, psi_d) in duals {
        let (grown, count) = temporal_enrich(&psi, psi_d, eps_t)?;
        psi = grown;
        added.push((*tag, count));
    }
    let mut sigma_min = Vec::with_capacity(duals.len());
    for (tag, psi_d) in duals {
        sigma_min.push((*tag, coupling_sigma_min(&psi, psi_d)?));
    }
    Ok((psi, TemporalEnrichmentReport { added, sigma_min, eps_t }))
}

/// Smallest singular value of `Psi_u^T Psi_d`. A coupling with more columns
/// than rows has a null vector regardless of its entries, so the value is
/// zero by construction and is reported as exactly that.
pub fn coupling_sigma_min(psi_u: &DMat, psi_d: &DMat) -> Result<f64> {
    if psi_u.nrows() != psi_d.nrows() {
        return Err(StabilityError::StepMismatch {
            expected: psi_u.nrows(),
            found: psi_d.nrows(),
        });
    }
    let xi = psi_u.transpose() * psi_d;
    if xi.ncols() > xi.nrows() {
        return Ok(0.0);
    }
    let svd = truncated_svd(&xi, Truncation::NumericalRank)?;
    Ok(svd.spectrum[svd.spectrum.len() - 1])
}

/// Coupling conditioning of one velocity time basis against its dual fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankDiagnostics {
    pub sigma_min: Vec<(FieldTag, f64)>,
    pub tolerance: f64,
}

impl RankDiagnostics {
    /// Fields whose coupling falls below the tolerance.
    pub fn violations(&self) -> Vec<FieldTag> {
        self.sigma_min
            .iter()
            .filter(|(_, s)| *s < self.tolerance)
            .map(|(tag, _)| *tag)
            .collect()
    }
}

/// Measures every dual coupling; see [`RankDiagnostics::violations`].
pub fn rank_diagnostics(psi_u: &DMat, duals: &[(FieldTag, &DMat)]) -> Result<RankDiagnostics> {
    let mut sigma_min = Vec::with_capacity(duals.len());
    for (tag, psi_d) in duals {
        sigma_min.push((*tag, coupling_sigma_min(psi_u, psi_d)?));
    }
    Ok(RankDiagnostics { sigma_min, tolerance: RANK_TOLERANCE })
}
