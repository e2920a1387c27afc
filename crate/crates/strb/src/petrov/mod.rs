//! Least-squares Petrov-Galerkin reduction of the space-time system.
//!
//! Instead of testing the stepping operator against the trial basis, this
//! route minimizes the weighted residual of the full space-time system over
//! the reduced trial space. The weight is the inverse of a diagonal
//! surrogate for the space-time norm — diagonal so that applying it costs a
//! scaling, not a solve. Writing the minimization out gives normal
//! equations: the reduced operator is a Gram matrix of the half-projected
//! stepping operator, symmetric by construction and positive definite
//! whenever the trial basis has independent columns. That last clause is
//! the whole point — the saddle structure that forces supremizer and
//! temporal enrichment on the plain Galerkin route is invisible here, and
//! plain POD bases are admissible as they stand.
//!
//! The price is quadratic conditioning (a Gram matrix squares the singular
//! values of the operator it contracts) and an assembly pass that touches
//! full-order rows. Both are paid offline; the online query is the same
//! dense solve as the Galerkin route, on a matrix of the same size.

mod stpgrb;

pub use stpgrb::{
    assemble_stpgrb, online_rhs_stpgrb, solve_stpgrb, HalfReducedBlocks, ReducedPGSystem,
};

use crate::fom::{FomError, FomSpatialBlocks};
use crate::pod::PodError;
use crate::tensor::{SparseMatrix, TensorError};
use crate::DVec;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PetrovError {
    #[error(
        "norm surrogate for the {field} block has a non-positive diagonal entry at index \
         {index} ({value:.3e}); a surrogate that is not strictly positive does not weight a norm"
    )]
    BadSurrogate { field: &'static str, index: usize, value: f64 },
    #[error(
        "least-squares normal matrix is singular or near-singular (condition estimate \
         {estimate:.3e}); run the coupling rank diagnostics — the normal matrix loses rank \
         only when the trial basis itself has dependent columns, since the space-time \
         operator is nonsingular"
    )]
    IllConditioned { estimate: f64 },
    #[error(
        "least-squares solve left relative residual {residual:.3e}, above the trusted bound; \
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

pub type Result<T> = std::result::Result<T, PetrovError>;

fn dimension_error(context: String) -> PetrovError {
    PetrovError::Tensor(TensorError::DimensionMismatch { context })
}

/// Diagonal surrogate of the space-time norm: per-field diagonal weight
/// vectors, repeated over the steps. The multiplier weight is the identity,
/// matching the multiplier norm itself.
///
/// The surrogate is norm-equivalent to the true space-time norm with
/// constants `c ||v||_P^2 <= ||v||_X^2 <= C ||v||_P^2`; the pair stored
/// here is a power-iteration estimate of the extreme generalized
/// eigenvalues, for reporting. When the spatial norm matrices are
/// themselves diagonal the surrogate is the exact norm, the constants are
/// exactly one, and `exact` says so — the case the sharp stability bound
/// can be tested in.
#[derive(Debug, Clone, PartialEq)]
pub struct NormSurrogate {
    /// Diagonal of the velocity norm matrix.
    pub velocity: DVec,
    /// Diagonal of the pressure norm matrix.
    pub pressure: DVec,
    /// Multiplier weights — all ones.
    pub multiplier: DVec,
    /// Estimated equivalence constants `(c, C)`.
    pub equivalence: (f64, f64),
    /// True when the surrogate equals the norm it stands in for.
    pub exact: bool,
}

impl NormSurrogate {
    /// Extracts the diagonals of the model's norm matrices and estimates
    /// the equivalence constants. Fails if any diagonal entry is not
    /// strictly positive — a symptom of a broken norm matrix.
    pub fn from_blocks(blocks: &FomSpatialBlocks) -> Result<Self> {
        let velocity = blocks.x_u.diagonal();
        let pressure = blocks.x_p.diagonal();
        let multiplier = DVec::from_element(blocks.n_lambda, 1.0);
        let mut surrogate = NormSurrogate {
            velocity,
            pressure,
            multiplier,
            equivalence: (1.0, 1.0),
            exact: is_diagonal(&blocks.x_u) && is_diagonal(&blocks.x_p),
        };
        surrogate.validate()?;
        if !surrogate.exact {
            let (cu, cu_up) = extreme_scaled_eigenvalues(&blocks.x_u, &surrogate.velocity);
            let (cp, cp_up) = extreme_scaled_eigenvalues(&blocks.x_p, &surrogate.pressure);
            // The multiplier block contributes the exact ratio one.
            surrogate.equivalence = (cu.min(cp).min(1.0), cu_up.max(cp_up).max(1.0));
        }
        Ok(surrogate)
    }

    /// Checks strict positivity of every diagonal. Public because the
    /// fields are: a hand-edited surrogate re-enters through here.
    pub fn validate(&self) -> Result<()> {
        for (field, diag) in
            [("velocity", &self.velocity), ("pressure", &self.pressure), ("multiplier", &self.multiplier)]
        {
            if let Some(index) = (0..diag.len()).find(|&i| diag[i] <= 0.0) {
                return Err(PetrovError::BadSurrogate { field, index, value: diag[index] });
            }
        }
        Ok(())
    }

    /// `1/sqrt(d)` for a stored diagonal, the row scaling that symmetrizes
    /// the weighted contractions.
    pub(crate) fn inverse_sqrt(diag: &DVec) -> DVec {
        diag.map(|v| 1.0 / v.sqrt())
    }
}

/// Whether every stored off-diagonal entry is zero.
fn is_diagonal(x: &SparseMatrix) -> bool {
    x.iter().all(|(i, j, v)| i == j || v == 0.0)
}

/// Extreme eigenvalues of `D^{-1/2} X D^{-1/2}` by power iteration — the
/// largest directly, the smallest through the shifted complement. Both
/// Rayleigh quotients converge from inside the spectrum, so the pair is an
/// estimate, not a bound; it is reported, never asserted against.
fn extreme_scaled_eigenvalues(x: &SparseMatrix, diag: &DVec) -> (f64, f64) {
    let isq = NormSurrogate::inverse_sqrt(diag);
    let apply = |v: &DVec| -> DVec { isq.component_mul(&x.matvec(&isq.component_mul(v))) };
    let upper = power_iteration(&apply, diag.len());
    let shifted = |v: &DVec| -> DVec { upper * v - apply(v) };
    let lower = upper - power_iteration(&shifted, diag.len());
    (lower, upper)
}

/// Largest eigenvalue of a symmetric positive semidefinite operator given
/// only its action. Deterministic start, Rayleigh-quotient convergence test.
fn power_iteration(apply: &impl Fn(&DVec) -> DVec, n: usize) -> f64 {
    let mut v = DVec::from_element(n, 1.0 / (n as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..500 {
        let w = apply(&v);
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-12 * next.abs().max(1.0) {
            return next;
        }
        lambda = next;
    }
    lambda
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testsupport::tiny_instance;
    use crate::DMat;
    use nalgebra::SymmetricEigen;

    /// Dense oracle for the equivalence constants: the extreme eigenvalues
    /// of the symmetrically scaled norm matrix.
    fn dense_extremes(x: &SparseMatrix, diag: &DVec) -> (f64, f64) {
        let isq = NormSurrogate::inverse_sqrt(diag);
        let n = diag.len();
        let xd = x.to_dense();
        let s = DMat::from_fn(n, n, |i, j| isq[i] * xd[(i, j)] * isq[j]);
        let eig = SymmetricEigen::new(s).eigenvalues;
        (eig.min(), eig.max())
    }

    #[test]
    fn surrogate_extracts_the_norm_diagonals() {
        let (blocks, _) = tiny_instance();
        let s = NormSurrogate::from_blocks(&blocks).unwrap();
        assert_eq!(s.velocity.len(), blocks.n_u);
        assert_eq!(s.pressure.len(), blocks.n_p);
        assert_eq!(s.multiplier, DVec::from_element(blocks.n_lambda, 1.0));
        for i in 0..blocks.n_u {
            assert_eq!(s.velocity[i], blocks.x_u.get(i, i));
        }
        // Finite-element norm matrices couple neighbors; the surrogate must
        // know it is only a surrogate here.
        assert!(!s.exact);
    }

    #[test]
    fn equivalence_estimate_tracks_the_dense_eigenvalue_oracle() {
        let (blocks, _) = tiny_instance();
        let s = NormSurrogate::from_blocks(&blocks).unwrap();
        let (cu, cu_up) = dense_extremes(&blocks.x_u, &s.velocity);
        let (cp, cp_up) = dense_extremes(&blocks.x_p, &s.pressure);
        let c_true = cu.min(cp).min(1.0);
        let c_up_true = cu_up.max(cp_up).max(1.0);
        assert!(c_true > 0.0);
        let (c, c_up) = s.equivalence;
        assert!(
            (c - c_true).abs() <= 5e-2 * c_true,
            "lower constant {c:.6} vs oracle {c_true:.6}"
        );
        assert!(
            (c_up - c_up_true).abs() <= 5e-2 * c_up_true,
            "upper constant {c_up:.6} vs oracle {c_up_true:.6}"
        );
        assert!(c > 0.0 && c <= c_up);
    }

    #[test]
    fn diagonal_norms_make_the_surrogate_exact() {
        let (mut blocks, _) = tiny_instance();
        blocks.x_u = SparseMatrix::from_diagonal(&blocks.x_u.diagonal());
        blocks.x_p = SparseMatrix::from_diagonal(&blocks.x_p.diagonal());
        let s = NormSurrogate::from_blocks(&blocks).unwrap();
        assert!(s.exact);
        assert_eq!(s.equivalence, (1.0, 1.0));
    }

    #[test]
    fn non_positive_diagonal_is_refused_by_field_and_index() {
        let (blocks, _) = tiny_instance();
        let mut s = NormSurrogate::from_blocks(&blocks).unwrap();
        s.pressure[3] = 0.0;
        match s.validate() {
            Err(PetrovError::BadSurrogate { field: "pressure", index: 3, value }) => {
                assert_eq!(value, 0.0)
            }
            other => panic!("expected the pressure diagnosis, got {other:?}"),
        }
        let err = s.validate().unwrap_err().to_string();
        assert!(err.contains("pressure"), "message should name the field: {err}");
    }
}
