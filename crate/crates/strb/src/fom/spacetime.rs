//! Monolithic space–time view of the marched problem. The full matrix is a
//! block two-by-two-by-two saddle structure whose only time coupling sits in
//! the velocity-velocity block: a block diagonal of step matrices plus two
//! block subdiagonals of the mass matrix carrying the BDF2 history. The
//! operator is kept in this factored form; materialization exists for small
//! oracle instances and the monolithic/marching equivalence check.
//!
//! Space–time vectors are ordered field-major: all velocity steps, then all
//! pressure steps, then all multiplier steps, each field time-major with
//! step j (1-based, t_j = j δ) occupying one contiguous spatial block.

use super::assemble::FomSpatialBlocks;
use super::datum::{DirichletDatum, ParameterVector};
use super::march::{insert_block, TimeGrid};
use crate::tensor::lu_condition_estimate;
use super::{FomError, Result};
use crate::tensor::SparseMatrix;
use crate::{DMat, DVec};
use nalgebra::linalg::LU;

/// Structural handle on the space–time operator.
#[derive(Debug, Clone)]
pub struct SpaceTimeSystem<'a> {
    pub blocks: &'a FomSpatialBlocks,
    pub grid: TimeGrid,
    /// M + β δ A, the diagonal velocity block.
    mass_plus: SparseMatrix,
}

/// Builds the structural operator for the given blocks and grid.
pub fn assemble_space_time<'a>(
    blocks: &'a FomSpatialBlocks,
    grid: &TimeGrid,
) -> Result<SpaceTimeSystem<'a>> {
    let mass_plus = SparseMatrix::linear_combination(
        &blocks.m,
        1.0,
        &blocks.a,
        TimeGrid::BETA * grid.delta(),
    )?;
    Ok(SpaceTimeSystem { blocks, grid: *grid, mass_plus })
}

impl SpaceTimeSystem<'_> {
    pub fn n_st(&self) -> usize {
        self.blocks.n_total() * self.grid.n_t
    }

    fn offsets(&self) -> (usize, usize) {
        let nt = self.grid.n_t;
        (self.blocks.n_u * nt, self.blocks.n_u * nt + self.blocks.n_p * nt)
    }

    /// Applies the operator without materializing it.
    pub fn apply(&self, w: &DVec) -> DVec {
        let (nu, np, nl) = (self.blocks.n_u, self.blocks.n_p, self.blocks.n_lambda);
        let nt = self.grid.n_t;
        let bd = TimeGrid::BETA * self.grid.delta();
        let (p0, l0) = self.offsets();
        let mut out = DVec::zeros(self.n_st());
        for j in 0..nt {
            let u_j = w.rows(j * nu, nu).clone_owned();
            let p_j = w.rows(p0 + j * np, np).clone_owned();
            let g_j = w.rows(l0 + j * nl, nl).clone_owned();

            let mut r = self.mass_plus.matvec(&u_j);
            r += self.blocks.bt_bc.matvec(&p_j) * bd;
            r += self.blocks.ct_bc.matvec(&g_j) * bd;
            if j >= 1 {
                let u_m1 = w.rows((j - 1) * nu, nu).clone_owned();
                r -= self.blocks.m.matvec(&u_m1) * TimeGrid::ALPHA1;
            }
            if j >= 2 {
                let u_m2 = w.rows((j - 2) * nu, nu).clone_owned();
                r -= self.blocks.m.matvec(&u_m2) * TimeGrid::ALPHA2;
            }
            out.rows_mut(j * nu, nu).copy_from(&r);
            out.rows_mut(p0 + j * np, np).copy_from(&self.blocks.b.matvec(&u_j));
            out.rows_mut(l0 + j * nl, nl).copy_from(&self.blocks.c.matvec(&u_j));
        }
        out
    }

    /// Right-hand side from an arbitrary stacked datum history.
    pub fn rhs_with(&self, datum_at: impl Fn(f64) -> DVec) -> DVec {
        let nl = self.blocks.n_lambda;
        let (_, l0) = self.offsets();
        let mut f = DVec::zeros(self.n_st());
        for j in 0..self.grid.n_t {
            f.rows_mut(l0 + j * nl, nl).copy_from(&datum_at(self.grid.time(j + 1)));
        }
        f
    }

    /// Right-hand side under the parametrized datum: only the constraint
    /// block is populated.
    pub fn rhs(&self, datum: &DirichletDatum, mu: &ParameterVector) -> DVec {
        self.rhs_with(|t| datum.stacked(t, mu))
    }

    /// Dense materialization; meant for small instances.
    pub fn materialize(&self) -> DMat {
        let (nu, np, nl) = (self.blocks.n_u, self.blocks.n_p, self.blocks.n_lambda);
        let nt = self.grid.n_t;
        let bd = TimeGrid::BETA * self.grid.delta();
        let (p0, l0) = self.offsets();
        let mut m = DMat::zeros(self.n_st(), self.n_st());
        for j in 0..nt {
            insert_block(&mut m, &self.mass_plus, j * nu, j * nu, 1.0);
            if j >= 1 {
                insert_block(&mut m, &self.blocks.m, j * nu, (j - 1) * nu, -TimeGrid::ALPHA1);
            }
            if j >= 2 {
                insert_block(&mut m, &self.blocks.m, j * nu, (j - 2) * nu, -TimeGrid::ALPHA2);
            }
            insert_block(&mut m, &self.blocks.bt_bc, j * nu, p0 + j * np, bd);
            insert_block(&mut m, &self.blocks.ct_bc, j * nu, l0 + j * nl, bd);
            insert_block(&mut m, &self.blocks.b, p0 + j * np, j * nu, 1.0);
            insert_block(&mut m, &self.blocks.c, l0 + j * nl, j * nu, 1.0);
        }
        m
    }

    /// Dense monolithic solve; the oracle counterpart of marching.
    pub fn monolithic_solve(&self, rhs: &DVec) -> Result<DVec> {
        let lu = LU::new(self.materialize());
        let estimate = lu_condition_estimate(&lu);
        lu.solve(rhs).ok_or(FomError::SingularStepMatrix { estimate })
    }

    /// Extracts step j (0-based, time t_{j+1}) as one [u; p; λ] vector.
    pub fn step_slice(&self, w: &DVec, j: usize) -> DVec {
        let (nu, np, nl) = (self.blocks.n_u, self.blocks.n_p, self.blocks.n_lambda);
        let (p0, l0) = self.offsets();
        let mut out = DVec::zeros(nu + np + nl);
        out.rows_mut(0, nu).copy_from(&w.rows(j * nu, nu));
        out.rows_mut(nu, np).copy_from(&w.rows(p0 + j * np, np));
        out.rows_mut(nu + np, nl).copy_from(&w.rows(l0 + j * nl, nl));
        out
    }
}
