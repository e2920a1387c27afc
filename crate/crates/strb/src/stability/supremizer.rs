//! Supremizer directions for the pressure and trace-multiplier fields.
//!
//! A supremizer is the velocity-space Riesz lift of one dual mode through its
//! coupling operator: the direction along which that mode's inf-sup supremum
//! is attained. Pressure supremizers are computed under the trace constraint,
//! by a saddle solve that keeps them in the kernel of the trace operator;
//! without that restriction, enriching the velocity space for the pressure
//! could degrade the multiplier coupling it is meant to leave alone.
//! Multiplier supremizers are plain Riesz lifts of the constraint columns.
//!
//! Both constructions inherit exact wall zeros: the boundary-replaced rows of
//! the velocity norm reduce to `kappa * s_a = 0` whenever the right-hand side
//! vanishes on the wall rows, which the boundary-modified coupling transposes
//! guarantee.

use super::{Result, StabilityError};
use crate::fom::FomSpatialBlocks;
use crate::pod::{FieldTag, SpaceBasis};
use crate::tensor::{cholesky, lu_condition_estimate, SparseMatrix, TensorError};
use crate::DMat;
use nalgebra::linalg::LU;

/// Supremizers for one dual field; column `j` lifts dual mode `j`.
#[derive(Debug, Clone)]
pub struct SupremizerSet {
    kind: FieldTag,
    vectors: DMat,
}

impl SupremizerSet {
    /// The dual field these directions lift.
    pub fn kind(&self) -> FieldTag {
        self.kind
    }

    /// Velocity-space directions, one column per dual mode.
    pub fn vectors(&self) -> &DMat {
        &self.vectors
    }

    pub fn count(&self) -> usize {
        self.vectors.ncols()
    }

    #[cfg(test)]
    pub(crate) fn synthetic(kind: FieldTag, vectors: DMat) -> Self {
        SupremizerSet { kind, vectors }
    }
}

fn insert(dst: &mut DMat, block: &SparseMatrix, r0: usize, c0: usize) {
    for (i, j, v) in block.iter() {
        dst[(r0 + i, c0 + j)] += v;
    }
}

/// Constrained supremizers for the pressure modes.
///
/// For each pressure mode `phi_j`, solves the saddle system
///
/// ```text
/// [ X_u  Ct_bc ] [ s ]   [ Bt_bc phi_j ]
/// [ C    0     ] [ y ] = [ 0           ]
/// ```
///
/// so that `s` maximizes the pressure coupling over the trace-constraint
/// kernel. The step matrix is factored once and reused for all modes.
pub fn pressure_supremizers(
    blocks: &FomSpatialBlocks,
    pressure: &SpaceBasis,
) -> Result<SupremizerSet> {
    if pressure.phi.nrows() != blocks.n_p {
        return Err(TensorError::DimensionMismatch {
            context: format!(
                "pressure basis has {} rows, model has {} pressure unknowns",
                pressure.phi.nrows(),
                blocks.n_p
            ),
        }
        .into());
    }
    let nu = blocks.n_u;
    let nl = blocks.n_lambda;
    let n = nu + nl;
    let mut saddle = DMat::zeros(n, n);
    insert(&mut saddle, &blocks.x_u, 0, 0);
    insert(&mut saddle, &blocks.ct_bc, 0, nu);
    insert(&mut saddle, &blocks.c, nu, 0);
    let lu = LU::new(saddle);
    if lu_condition_estimate(&lu) > 1e14 {
        return Err(StabilityError::SingularSaddle);
    }
    let mut rhs = DMat::zeros(n, pressure.phi.ncols());
    rhs.rows_mut(0, nu).copy_from(&blocks.bt_bc.matmul_dense(&pressure.phi));
    let solution = lu.solve(&rhs).ok_or(StabilityError::SingularSaddle)?;
    Ok(SupremizerSet { kind: FieldTag::Pressure, vectors: solution.rows(0, nu).into_owned() })
}

/// Supremizers for the multiplier modes of boundary `k` (1-based).
///
/// The multiplier basis is the identity on its block, so the lift of mode `j`
/// solves `X_u s = Ct_bc e_j` with `e_j` ranging over the block's columns.
pub fn multiplier_supremizers(blocks: &FomSpatialBlocks, k: u8) -> Result<SupremizerSet> {
    let count = blocks.multiplier_sizes().len();
    if k == 0 || k as usize > count {
        return Err(StabilityError::BoundaryRange { boundary: k, count });
    }
    let range = blocks.multiplier_block_range(k);
    let factor = cholesky(&blocks.x_u)?;
    let columns = blocks.ct_bc.to_dense().columns(range.start, range.len()).into_owned();
    let vectors = factor.solve_spd_mat(&columns);
    Ok(SupremizerSet { kind: FieldTag::Multiplier(k), vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pod::{split_fields, spatial_pod, NormTag};
    use crate::tensor::Truncation;
    use crate::testsupport::{march_trajectories, spread_parameters, tiny_instance};
    use crate::{fom::TimeGrid, DVec};

    fn instance_with_pressure_basis() -> (crate::fom::FomSpatialBlocks, SpaceBasis) {
        let (blocks, datum) = tiny_instance();
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let mus = spread_parameters(3, 11);
        let trajectories = march_trajectories(&blocks, &datum, &grid, &mus);
        let fields = split_fields(&blocks, &trajectories, &mus).unwrap();
        let basis =
            spatial_pod(&fields.pressure, &blocks.x_p, NormTag::Pressure, Truncation::Energy(1e-8))
                .unwrap();
        (blocks, basis)
    }

    fn x_norm(blocks: &crate::fom::FomSpatialBlocks, v: &DVec) -> f64 {
        blocks.x_u.bilinear(v, v).max(0.0).sqrt()
    }

    #[test]
    fn pressure_supremizers_stay_in_the_trace_kernel() {
        let (blocks, basis) = instance_with_pressure_basis();
        let set = pressure_supremizers(&blocks, &basis).unwrap();
        assert_eq!(set.kind(), FieldTag::Pressure);
        assert_eq!(set.count(), basis.phi.ncols());
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            let trace = blocks.c.matvec(&s);
            assert!(
                trace.norm() <= 1e-9 * s.norm(),
                "mode {j}: trace residual {:e} vs norm {:e}",
                trace.norm(),
                s.norm()
            );
        }
    }

    // Pairing a supremizer with its own mode through the coupling operator
    // returns exactly its squared velocity norm; the constraint term drops
    // out because the supremizer sits in the trace kernel and vanishes on
    // the walls.
    #[test]
    fn pressure_supremizers_realize_the_coupling_norm() {
        let (blocks, basis) = instance_with_pressure_basis();
        let set = pressure_supremizers(&blocks, &basis).unwrap();
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            let phi_j = basis.phi.column(j).into_owned();
            let coupling = s.dot(&blocks.bt_bc.matvec(&phi_j));
            let energy = blocks.x_u.bilinear(&s, &s);
            assert!(
                (coupling - energy).abs() <= 1e-9 * energy.abs(),
                "mode {j}: coupling {coupling:e} vs energy {energy:e}"
            );
        }
    }

    #[test]
    fn supremizer_norms_are_bounded_away_from_zero() {
        let (blocks, basis) = instance_with_pressure_basis();
        let set = pressure_supremizers(&blocks, &basis).unwrap();
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            assert!(x_norm(&blocks, &s) > 1e-8, "mode {j} collapsed");
        }
    }

    #[test]
    fn pressure_supremizers_vanish_on_walls() {
        let (blocks, basis) = instance_with_pressure_basis();
        let set = pressure_supremizers(&blocks, &basis).unwrap();
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            let scale = s.norm();
            for &a in &blocks.wall_dofs {
                assert!(s[a].abs() <= 1e-10 * scale, "wall dof {a} carries {:e}", s[a]);
            }
        }
    }

    #[test]
    fn multiplier_supremizers_lift_the_constraint_columns() {
        let (blocks, _) = tiny_instance();
        let set = multiplier_supremizers(&blocks, 1).unwrap();
        assert_eq!(set.kind(), FieldTag::Multiplier(1));
        let range = blocks.multiplier_block_range(1);
        assert_eq!(set.count(), range.len());
        let ct = blocks.ct_bc.to_dense();
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            let target = ct.column(range.start + j).into_owned();
            let residual = blocks.x_u.matvec(&s) - &target;
            assert!(
                residual.norm() <= 1e-10 * target.norm(),
                "mode {j}: residual {:e}",
                residual.norm()
            );
        }
    }

    // Same pairing identity as for the pressure, now through the boundary's
    // trace block: e_j^T C_k s_j equals the squared velocity norm of s_j.
    #[test]
    fn multiplier_supremizer_coupling_is_positive() {
        let (blocks, _) = tiny_instance();
        let set = multiplier_supremizers(&blocks, 1).unwrap();
        let c_k = &blocks.c_blocks[0];
        for j in 0..set.count() {
            let s = set.vectors().column(j).into_owned();
            let coupling = c_k.matvec(&s)[j];
            let energy = blocks.x_u.bilinear(&s, &s);
            assert!(energy > 0.0);
            assert!(
                (coupling - energy).abs() <= 1e-9 * energy,
                "mode {j}: coupling {coupling:e} vs energy {energy:e}"
            );
        }
    }

    #[test]
    fn multiplier_supremizers_span_their_block() {
        let (blocks, _) = tiny_instance();
        let set = multiplier_supremizers(&blocks, 1).unwrap();
        let svd = crate::tensor::truncated_svd(set.vectors(), Truncation::NumericalRank).unwrap();
        assert_eq!(svd.rank(), set.count());
    }

    #[test]
    fn boundary_index_is_validated() {
        let (blocks, _) = tiny_instance();
        for k in [0u8, 2] {
            match multiplier_supremizers(&blocks, k) {
                Err(StabilityError::BoundaryRange { boundary, count }) => {
                    assert_eq!(boundary, k);
                    assert_eq!(count, 1);
                }
                other => panic!("expected a boundary range error, got {other:?}"),
            }
        }
    }
}
