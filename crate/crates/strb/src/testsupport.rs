//! Fixtures shared by unit tests across modules: one flow instance small
//! enough that space-time operators can be materialized densely and checked
//! against brute-force oracles, plus deterministic parameter draws.

use crate::fom::{
    assemble_fom, bdf2_march, DirichletDatum, FomSpatialBlocks, Mesh2D, ParameterVector,
    TimeGrid, WeightLaw, PARAMETER_DOMAIN,
};
use crate::pod::{
    assemble_space_time_basis, spatial_pod, split_fields, temporal_pod, FieldTag, NormTag,
    SpaceTimeBasis, TimeBasis,
};
use crate::stability::{
    enrich_space_basis, multiplier_supremizers, pressure_supremizers, temporal_enrich_all,
};
use crate::tensor::Truncation;
use crate::DMat;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Channel instance with 70 velocity, 12 pressure, and 6 multiplier
/// unknowns; a full space-time operator at a handful of steps stays in the
/// hundreds of rows.
pub(crate) fn tiny_instance() -> (FomSpatialBlocks, DirichletDatum) {
    let mesh = Mesh2D::channel(3, 2, 2.0, 1.0).unwrap();
    let blocks = assemble_fom(&mesh, 1.06, 3.5e-3, &[2]).unwrap();
    let datum = DirichletDatum::build(&blocks, WeightLaw::Single, 1.0).unwrap();
    (blocks, datum)
}

/// Uniform draws from the parameter box, fixed seed.
pub(crate) fn spread_parameters(n: usize, seed: u64) -> Vec<ParameterVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let [m0, m1, m2] = PARAMETER_DOMAIN.map(|[lo, hi]| rng.gen_range(lo..hi));
            ParameterVector::new(m0, m1, m2)
        })
        .collect()
}

/// Marches every parameter on the same grid; columns are time steps.
pub(crate) fn march_trajectories(
    blocks: &FomSpatialBlocks,
    datum: &DirichletDatum,
    grid: &TimeGrid,
    mus: &[ParameterVector],
) -> Vec<DMat> {
    mus.iter().map(|mu| bdf2_march(blocks, grid, datum, mu).unwrap()).collect()
}

/// Tiny instance plus a marched training sweep on it.
pub(crate) fn tiny_training(
    n_t: usize,
    n_mu: usize,
    seed: u64,
) -> (FomSpatialBlocks, DirichletDatum, TimeGrid, Vec<ParameterVector>, Vec<DMat>) {
    let (blocks, datum) = tiny_instance();
    let grid = TimeGrid::new(1.0, n_t).unwrap();
    let mus = spread_parameters(n_mu, seed);
    let trajs = march_trajectories(&blocks, &datum, &grid, &mus);
    (blocks, datum, grid, mus, trajs)
}

/// Truncations for each basis branch; `temporal_tolerance: None` skips the
/// temporal enrichment pass.
#[derive(Debug, Clone, Copy)]
pub(crate) struct BasisRecipe {
    pub velocity_space: Truncation,
    pub velocity_time: Truncation,
    pub pressure_space: Truncation,
    pub pressure_time: Truncation,
    pub temporal_tolerance: Option<f64>,
}

impl BasisRecipe {
    /// Everything at numerical rank: the basis spans the training sweep.
    pub fn full() -> Self {
        BasisRecipe {
            velocity_space: Truncation::NumericalRank,
            velocity_time: Truncation::NumericalRank,
            pressure_space: Truncation::NumericalRank,
            pressure_time: Truncation::NumericalRank,
            temporal_tolerance: Some(0.5),
        }
    }
}

/// Field-wise POD with no stabilizing enrichment at all — no supremizers,
/// no temporal enrichment, whatever `temporal_tolerance` says. This is the
/// basis a least-squares projection is supposed to handle on its own, and
/// the one a plain Galerkin projection is entitled to choke on.
pub(crate) fn plain_pod_bases(
    blocks: &FomSpatialBlocks,
    trajectories: &[DMat],
    mus: &[ParameterVector],
    recipe: &BasisRecipe,
) -> SpaceTimeBasis {
    let fields = split_fields(blocks, trajectories, mus).unwrap();
    let velocity_space =
        spatial_pod(&fields.velocity, &blocks.x_u, NormTag::Velocity, recipe.velocity_space)
            .unwrap();
    let pressure_space =
        spatial_pod(&fields.pressure, &blocks.x_p, NormTag::Pressure, recipe.pressure_space)
            .unwrap();
    let velocity_time = temporal_pod(&fields.velocity, recipe.velocity_time).unwrap();
    let pressure_time = temporal_pod(&fields.pressure, recipe.pressure_time).unwrap();
    let multiplier_time: Vec<TimeBasis> = fields
        .multipliers
        .iter()
        .map(|s| temporal_pod(s, Truncation::NumericalRank).unwrap())
        .collect();
    assemble_space_time_basis(
        (velocity_space, velocity_time),
        (pressure_space, pressure_time),
        blocks.multiplier_sizes(),
        multiplier_time,
    )
    .unwrap()
}

/// The offline construction in miniature: field-wise POD, supremizer
/// enrichment of the velocity space, optional temporal enrichment of the
/// velocity time basis against the constraint time bases.
pub(crate) fn enriched_pod_bases(
    blocks: &FomSpatialBlocks,
    trajectories: &[DMat],
    mus: &[ParameterVector],
    recipe: &BasisRecipe,
) -> SpaceTimeBasis {
    let fields = split_fields(blocks, trajectories, mus).unwrap();
    let velocity_space =
        spatial_pod(&fields.velocity, &blocks.x_u, NormTag::Velocity, recipe.velocity_space)
            .unwrap();
    let pressure_space =
        spatial_pod(&fields.pressure, &blocks.x_p, NormTag::Pressure, recipe.pressure_space)
            .unwrap();
    let mut sets = vec![pressure_supremizers(blocks, &pressure_space).unwrap()];
    for k in 1..=blocks.multiplier_sizes().len() as u8 {
        sets.push(multiplier_supremizers(blocks, k).unwrap());
    }
    let enriched = enrich_space_basis(&velocity_space, &sets, &blocks.x_u).unwrap();
    let velocity_space = enriched.into_space_basis(&velocity_space);

    let mut velocity_time = temporal_pod(&fields.velocity, recipe.velocity_time).unwrap();
    let pressure_time = temporal_pod(&fields.pressure, recipe.pressure_time).unwrap();
    let multiplier_time: Vec<TimeBasis> = fields
        .multipliers
        .iter()
        .map(|s| temporal_pod(s, Truncation::NumericalRank).unwrap())
        .collect();
    if let Some(eps) = recipe.temporal_tolerance {
        let mut duals: Vec<(FieldTag, &DMat)> = vec![(FieldTag::Pressure, &pressure_time.psi)];
        for (i, tb) in multiplier_time.iter().enumerate() {
            duals.push((FieldTag::Multiplier((i + 1) as u8), &tb.psi));
        }
        let (psi, _) = temporal_enrich_all(&velocity_time.psi, &duals, eps).unwrap();
        velocity_time.psi = psi;
    }
    assemble_space_time_basis(
        (velocity_space, velocity_time),
        (pressure_space, pressure_time),
        blocks.multiplier_sizes(),
        multiplier_time,
    )
    .unwrap()
}
