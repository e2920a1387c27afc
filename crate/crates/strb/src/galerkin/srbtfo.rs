//! The space-only reduced baseline: the two-step march kept intact, each
//! step shrunk to the reduced saddle of velocity and pressure modes plus
//! the untouched multipliers. The step matrix is parameter-independent and
//! factored once; a query costs one back-substitution per step.

use super::{
    dimension_error, project_spatial_blocks, GalerkinError, Result, CONDITION_LIMIT,
};
use crate::fom::{DirichletDatum, FomSpatialBlocks, ParameterVector, TimeGrid};
use crate::pod::SpaceBasis;
use crate::tensor::lu_condition_estimate;
use crate::{DMat, DVec};
use nalgebra::linalg::LU;

/// Reduced trajectory from the marched baseline: one column per step,
/// velocity coefficients first, then pressure, then the multiplier rows
/// passed through unreduced.
#[derive(Debug, Clone)]
pub struct SpaceReducedTrajectory {
    pub coeffs: DMat,
    pub n_velocity: usize,
    pub n_pressure: usize,
}

impl SpaceReducedTrajectory {
    pub fn n_steps(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Expands the coefficients back to full unknowns, rows ordered like a
    /// monolithic trajectory: velocity, pressure, multiplier.
    pub fn reconstruct(&self, velocity: &SpaceBasis, pressure: &SpaceBasis) -> DMat {
        assert_eq!(velocity.n_modes(), self.n_velocity, "velocity basis does not fit the coefficients");
        assert_eq!(pressure.n_modes(), self.n_pressure, "pressure basis does not fit the coefficients");
        let n_l = self.coeffs.nrows() - self.n_velocity - self.n_pressure;
        let rows = velocity.phi.nrows() + pressure.phi.nrows() + n_l;
        let mut full = DMat::zeros(rows, self.n_steps());
        full.rows_mut(0, velocity.phi.nrows())
            .copy_from(&(&velocity.phi * self.coeffs.rows(0, self.n_velocity)));
        full.rows_mut(velocity.phi.nrows(), pressure.phi.nrows())
            .copy_from(&(&pressure.phi * self.coeffs.rows(self.n_velocity, self.n_pressure)));
        full.rows_mut(velocity.phi.nrows() + pressure.phi.nrows(), n_l)
            .copy_from(&self.coeffs.rows(self.n_velocity + self.n_pressure, n_l));
        full
    }
}

/// Marches the reduced saddle system from rest. The velocity basis must
/// carry supremizer columns for the reduced step matrix to be invertible;
/// without them the divergence rows collapse and the solve is refused.
pub fn solve_srbtfo(
    velocity: &SpaceBasis,
    pressure: &SpaceBasis,
    blocks: &FomSpatialBlocks,
    grid: &TimeGrid,
    datum: &DirichletDatum,
    mu: &ParameterVector,
) -> Result<SpaceReducedTrajectory> {
    if datum.n_lambda() != blocks.n_lambda {
        return Err(dimension_error(format!(
            "datum spans {} multiplier unknowns, the model {}",
            datum.n_lambda(),
            blocks.n_lambda
        )));
    }
    let red = project_spatial_blocks(blocks, &velocity.phi, &pressure.phi)?;
    let (n_u, n_p, n_l) = (velocity.n_modes(), pressure.n_modes(), blocks.n_lambda);
    let n = n_u + n_p + n_l;
    let bd = TimeGrid::BETA * grid.delta();

    let mut step = DMat::zeros(n, n);
    step.view_mut((0, 0), (n_u, n_u)).copy_from(&(&red.m + bd * &red.a));
    step.view_mut((0, n_u), (n_u, n_p)).copy_from(&(bd * &red.bt));
    step.view_mut((0, n_u + n_p), (n_u, n_l)).copy_from(&(bd * &red.ct));
    step.view_mut((n_u, 0), (n_p, n_u)).copy_from(&red.b);
    step.view_mut((n_u + n_p, 0), (n_l, n_u)).copy_from(&red.c);

    let lu = LU::new(step);
    let estimate = lu_condition_estimate(&lu);
    if estimate > CONDITION_LIMIT {
        return Err(GalerkinError::IllConditioned { estimate });
    }

    let mut coeffs = DMat::zeros(n, grid.n_t);
    let mut prev = DVec::zeros(n_u);
    let mut prev2 = DVec::zeros(n_u);
    for j in 1..=grid.n_t {
        let mut rhs = DVec::zeros(n);
        rhs.rows_mut(0, n_u)
            .copy_from(&(&red.m * (TimeGrid::ALPHA1 * &prev + TimeGrid::ALPHA2 * &prev2)));
        rhs.rows_mut(n_u + n_p, n_l).copy_from(&datum.stacked(grid.time(j), mu));
        let w = lu
            .solve(&rhs)
            .ok_or(GalerkinError::IllConditioned { estimate: f64::INFINITY })?;
        prev2 = std::mem::replace(&mut prev, w.rows(0, n_u).clone_owned());
        coeffs.set_column(j - 1, &w);
    }
    Ok(SpaceReducedTrajectory { coeffs, n_velocity: n_u, n_pressure: n_p })
}
