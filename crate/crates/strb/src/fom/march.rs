//! BDF2 time marching of the saddle system. The step matrix is factored once
//! and reused across all steps (it does not depend on time or on the
//! parameters, which only enter through the constraint right-hand side), so a
//! march costs one dense LU plus two triangular solves per step.

use super::assemble::FomSpatialBlocks;
use super::datum::{DirichletDatum, ParameterVector};
use super::{FomError, Result};
use crate::tensor::{lu_condition_estimate, SparseMatrix};
use crate::{DMat, DVec};
use nalgebra::linalg::LU;

/// Uniform grid on [0, T] with the BDF2 coefficients the scheme uses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub period: f64,
    pub n_t: usize,
}

impl TimeGrid {
    pub const ALPHA1: f64 = 4.0 / 3.0;
    pub const ALPHA2: f64 = -1.0 / 3.0;
    pub const BETA: f64 = 2.0 / 3.0;

    /// At least three steps; fewer leaves the two-step scheme degenerate.
    pub fn new(period: f64, n_t: usize) -> Result<Self> {
        if period <= 0.0 {
            return Err(FomError::BadParameter("period must be positive".into()));
        }
        if n_t < 3 {
            return Err(FomError::BadParameter(format!("need at least 3 time steps, got {n_t}")));
        }
        Ok(TimeGrid { period, n_t })
    }

    pub fn delta(&self) -> f64 {
        self.period / self.n_t as f64
    }

    /// Node t_j = j δ, with t_0 = 0 and t_{n_t} = T.
    pub fn time(&self, j: usize) -> f64 {
        self.period * j as f64 / self.n_t as f64
    }
}

/// Adds `scale` times a sparse block into a dense matrix at an offset.
pub(super) fn insert_block(dst: &mut DMat, block: &SparseMatrix, r0: usize, c0: usize, scale: f64) {
    for (i, j, v) in block.iter() {
        dst[(r0 + i, c0 + j)] += scale * v;
    }
}

/// Dense BDF2 step matrix in per-step DOF order [u; p; λ].
pub(super) fn step_matrix(blocks: &FomSpatialBlocks, delta: f64) -> DMat {
    let (nu, np, nl) = (blocks.n_u, blocks.n_p, blocks.n_lambda);
    let n = nu + np + nl;
    let bd = TimeGrid::BETA * delta;
    let mut s = DMat::zeros(n, n);
    insert_block(&mut s, &blocks.m, 0, 0, 1.0);
    insert_block(&mut s, &blocks.a, 0, 0, bd);
    insert_block(&mut s, &blocks.bt_bc, 0, nu, bd);
    insert_block(&mut s, &blocks.ct_bc, 0, nu + np, bd);
    insert_block(&mut s, &blocks.b, nu, 0, 1.0);
    insert_block(&mut s, &blocks.c, nu + np, 0, 1.0);
    s
}

/// Marches the model with an arbitrary time-dependent constraint datum.
/// Returns the trajectory as columns w(t_1) … w(t_{n_t}); the history starts
/// from rest (both back values zero).
pub fn bdf2_march_with(
    blocks: &FomSpatialBlocks,
    grid: &TimeGrid,
    datum_at: impl Fn(f64) -> DVec,
) -> Result<DMat> {
    let (nu, np, nl) = (blocks.n_u, blocks.n_p, blocks.n_lambda);
    let n = nu + np + nl;
    let lu = LU::new(step_matrix(blocks, grid.delta()));
    let estimate = lu_condition_estimate(&lu);
    if !estimate.is_finite() {
        return Err(FomError::SingularStepMatrix { estimate });
    }

    let mut trajectory = DMat::zeros(n, grid.n_t);
    let mut prev = DVec::zeros(nu);
    let mut prev2 = DVec::zeros(nu);
    for j in 1..=grid.n_t {
        let mut rhs = DVec::zeros(n);
        rhs.rows_mut(0, nu).copy_from(
            &(blocks.m.matvec(&prev) * TimeGrid::ALPHA1 + blocks.m.matvec(&prev2) * TimeGrid::ALPHA2),
        );
        let g = datum_at(grid.time(j));
        rhs.rows_mut(nu + np, nl).copy_from(&g);
        let w = lu
            .solve(&rhs)
            .ok_or(FomError::SingularStepMatrix { estimate })?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(FomError::SingularStepMatrix { estimate });
        }
        prev2 = std::mem::replace(&mut prev, w.rows(0, nu).clone_owned());
        trajectory.set_column(j - 1, &w);
    }
    Ok(trajectory)
}

/// Marches the model under the parametrized datum.
pub fn bdf2_march(
    blocks: &FomSpatialBlocks,
    grid: &TimeGrid,
    datum: &DirichletDatum,
    mu: &ParameterVector,
) -> Result<DMat> {
    bdf2_march_with(blocks, grid, |t| datum.stacked(t, mu))
}

/// Steady Stokes solve with constraint datum `g`: the infinite-time limit of
/// the march when the datum is held constant.
pub fn steady_solve(blocks: &FomSpatialBlocks, g: &DVec) -> Result<DVec> {
    let (nu, np, nl) = (blocks.n_u, blocks.n_p, blocks.n_lambda);
    let n = nu + np + nl;
    let mut s = DMat::zeros(n, n);
    insert_block(&mut s, &blocks.a, 0, 0, 1.0);
    insert_block(&mut s, &blocks.bt_bc, 0, nu, 1.0);
    insert_block(&mut s, &blocks.ct_bc, 0, nu + np, 1.0);
    insert_block(&mut s, &blocks.b, nu, 0, 1.0);
    insert_block(&mut s, &blocks.c, nu + np, 0, 1.0);
    let lu = LU::new(s);
    let estimate = lu_condition_estimate(&lu);
    let mut rhs = DVec::zeros(n);
    rhs.rows_mut(nu + np, nl).copy_from(g);
    lu.solve(&rhs).ok_or(FomError::SingularStepMatrix { estimate })
}
