//! The space-time Galerkin system: offline Kronecker assembly, online
//! loads, and the dense solve.
//!
//! Projecting the monolithic stepping operator onto factored trial pairs
//! collapses every block to `spatial ⊗ temporal`. The diagonal of the
//! stepping recursion contracts to an exact Kronecker delta, the one- and
//! two-step history terms to shifted Gramians of the velocity time basis,
//! and the pressure and trace couplings to cross-Gramians between time
//! bases. The assembled matrix is small and dense; its conditioning is
//! governed by those cross-Gramians, which is why a failed solve points at
//! the rank diagnostics rather than at the factorization.

use super::{
    dimension_error, kron_into, project_spatial_blocks, GalerkinError, OnlineRhs, ReducedLayout,
    Result, RomSolution, SpaceReducedBlocks, CONDITION_LIMIT, RESIDUAL_LIMIT,
};
use crate::fom::{DirichletDatum, FomSpatialBlocks, ParameterVector, TimeGrid};
use crate::pod::SpaceTimeBasis;
use crate::tensor::{lu_condition_estimate, read_dense, shifted_gramian, write_dense};
use crate::{DMat, DVec};
use nalgebra::linalg::LU;
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

/// Offline-assembled reduced space-time operator with the factors the
/// online phase needs. Parameter-independent by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedGalerkinSystem {
    /// Spatial blocks on the reduced spaces.
    pub spatial: SpaceReducedBlocks,
    /// Velocity-pressure temporal coupling (Ψᵘ)ᵀΨᵖ.
    pub coupling_up: DMat,
    /// Velocity-multiplier temporal couplings, one per boundary.
    pub coupling_ul: Vec<DMat>,
    /// One- and two-step shifted Gramians of the velocity time basis.
    pub gram1: DMat,
    pub gram2: DMat,
    /// Multiplier time bases, kept for projecting boundary waveforms online.
    pub multiplier_time: Vec<DMat>,
    /// Spatial size of each multiplier block.
    pub multiplier_dims: Vec<usize>,
    /// The assembled dense operator.
    pub a_st: DMat,
    pub delta: f64,
    pub layout: ReducedLayout,
}

/// Assembles the reduced space-time operator. The bases are expected to be
/// enriched — spatially with supremizers, temporally against the constraint
/// time bases — but nothing here checks that; an unenriched basis merely
/// produces the singular matrix it deserves, caught at solve time.
pub fn assemble_stgrb(
    bases: &SpaceTimeBasis,
    blocks: &FomSpatialBlocks,
    grid: &TimeGrid,
) -> Result<ReducedGalerkinSystem> {
    if bases.multiplier_dims != blocks.multiplier_sizes() {
        return Err(dimension_error(format!(
            "basis multiplier blocks {:?} do not match the model blocks {:?}",
            bases.multiplier_dims,
            blocks.multiplier_sizes()
        )));
    }
    if bases.n_steps() != grid.n_t {
        return Err(dimension_error(format!(
            "time bases sampled on {} steps, grid has {}",
            bases.n_steps(),
            grid.n_t
        )));
    }
    let spatial =
        project_spatial_blocks(blocks, &bases.velocity_space.phi, &bases.pressure_space.phi)?;
    let psi_u = &bases.velocity_time.psi;
    let coupling_up = psi_u.transpose() * &bases.pressure_time.psi;
    let coupling_ul: Vec<DMat> =
        bases.multiplier_time.iter().map(|tb| psi_u.transpose() * &tb.psi).collect();
    let gram1 = shifted_gramian(psi_u, 1, 0)?;
    let gram2 = shifted_gramian(psi_u, 2, 0)?;

    let layout = ReducedLayout::from_basis(bases);
    let delta = grid.delta();
    let bd = TimeGrid::BETA * delta;
    let n_vt = bases.velocity_time.n_modes();
    let mut a_st = DMat::zeros(layout.total(), layout.total());

    // Velocity-velocity: step diagonal plus the two history bands.
    let stepped = &spatial.m + bd * &spatial.a;
    kron_into(&mut a_st, 0, 0, &stepped, &DMat::identity(n_vt, n_vt), 1.0);
    kron_into(&mut a_st, 0, 0, &spatial.m, &gram1, -TimeGrid::ALPHA1);
    kron_into(&mut a_st, 0, 0, &spatial.m, &gram2, -TimeGrid::ALPHA2);

    // Pressure and trace couplings; only the rows acting on velocity carry
    // the step weight, mirroring the monolithic operator.
    let p0 = layout.pressure_range().start;
    kron_into(&mut a_st, 0, p0, &spatial.bt, &coupling_up, bd);
    kron_into(&mut a_st, p0, 0, &spatial.b, &coupling_up.transpose(), 1.0);
    let mut off = 0;
    for (k, &dim) in bases.multiplier_dims.iter().enumerate() {
        let l0 = layout.multiplier_block_range(k).start;
        let ct_k = spatial.ct.columns(off, dim).into_owned();
        let c_k = spatial.c.rows(off, dim).into_owned();
        kron_into(&mut a_st, 0, l0, &ct_k, &coupling_ul[k], bd);
        kron_into(&mut a_st, l0, 0, &c_k, &coupling_ul[k].transpose(), 1.0);
        off += dim;
    }

    Ok(ReducedGalerkinSystem {
        spatial,
        coupling_up,
        coupling_ul,
        gram1,
        gram2,
        multiplier_time: bases.multiplier_time.iter().map(|tb| tb.psi.clone()).collect(),
        multiplier_dims: bases.multiplier_dims.clone(),
        a_st,
        delta,
        layout,
    })
}

/// Projects the boundary waveform for one parameter query. Only the
/// multiplier block is nonzero: per boundary, the sampled waveform is
/// contracted against that boundary's time basis and scaled by the spatial
/// trace profile.
pub fn online_rhs_stgrb(
    system: &ReducedGalerkinSystem,
    datum: &DirichletDatum,
    mu: &ParameterVector,
) -> Result<OnlineRhs> {
    let n_l: usize = system.multiplier_dims.iter().sum();
    if datum.n_lambda() != n_l {
        return Err(dimension_error(format!(
            "datum spans {} multiplier unknowns, the system {}",
            datum.n_lambda(),
            n_l
        )));
    }
    let mut f_hat = DVec::zeros(system.layout.total());
    for (k, psi) in system.multiplier_time.iter().enumerate() {
        // Waveform at the step targets t_1 … t_{N^t}.
        let samples = DVec::from_fn(psi.nrows(), |j, _| {
            datum.g_t((k + 1) as u8, (j + 1) as f64 * system.delta, mu)
        });
        let coeffs = psi.transpose() * samples;
        let g_s = &datum.spatial[k];
        let block = system.layout.multiplier_block_range(k);
        for a in 0..system.multiplier_dims[k] {
            for jt in 0..coeffs.len() {
                f_hat[block.start + a * coeffs.len() + jt] = g_s[a] * coeffs[jt];
            }
        }
    }
    Ok(OnlineRhs { f_hat, extrapolated: !mu.in_default_domain() })
}

/// Dense solve of the reduced system with partial pivoting. Refuses
/// near-singular operators and verifies the residual it leaves behind.
pub fn solve_stgrb(system: &ReducedGalerkinSystem, rhs: &OnlineRhs) -> Result<RomSolution> {
    if rhs.f_hat.len() != system.layout.total() {
        return Err(dimension_error(format!(
            "load vector has length {}, the system {}",
            rhs.f_hat.len(),
            system.layout.total()
        )));
    }
    let lu = LU::new(system.a_st.clone());
    let estimate = lu_condition_estimate(&lu);
    if estimate > CONDITION_LIMIT {
        return Err(GalerkinError::IllConditioned { estimate });
    }
    let w_hat =
        lu.solve(&rhs.f_hat).ok_or(GalerkinError::IllConditioned { estimate: f64::INFINITY })?;
    let residual = (&system.a_st * &w_hat - &rhs.f_hat).norm();
    // Backward-stable scale: a healthy factorization leaves a residual tiny
    // against both the load and the applied operator.
    let scale = rhs.f_hat.norm().max(system.a_st.norm() * w_hat.norm()).max(1.0);
    if residual > RESIDUAL_LIMIT * scale {
        return Err(GalerkinError::UnreliableSolve { residual: residual / scale });
    }
    Ok(RomSolution::new(w_hat, system.layout.clone()))
}

/// Sidecar describing the persisted system. The stepping weights are
/// recorded so a reader can verify which convention the operator encodes.
#[derive(Debug, Serialize, Deserialize)]
struct SystemManifest {
    delta: f64,
    bdf2_weights: [f64; 3],
    multiplier_dims: Vec<usize>,
    layout: ReducedLayout,
}

impl ReducedGalerkinSystem {
    /// Writes the operator and all its factors as binary artifacts plus a
    /// JSON manifest.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(crate::tensor::TensorError::from)?;
        let mats: Vec<(String, &DMat)> = self.named_matrices();
        for (name, m) in &mats {
            let mut w = BufWriter::new(File::create(dir.join(name)).map_err(tensor_io)?);
            write_dense(&mut w, m)?;
        }
        let manifest = SystemManifest {
            delta: self.delta,
            bdf2_weights: [TimeGrid::ALPHA1, TimeGrid::ALPHA2, TimeGrid::BETA],
            multiplier_dims: self.multiplier_dims.clone(),
            layout: self.layout.clone(),
        };
        let f = File::create(dir.join("system.json")).map_err(tensor_io)?;
        serde_json::to_writer_pretty(BufWriter::new(f), &manifest).map_err(json_format)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let f = File::open(dir.join("system.json")).map_err(tensor_io)?;
        let manifest: SystemManifest = serde_json::from_reader(BufReader::new(f)).map_err(json_format)?;
        let expected = [TimeGrid::ALPHA1, TimeGrid::ALPHA2, TimeGrid::BETA];
        if manifest.bdf2_weights != expected {
            return Err(GalerkinError::Tensor(crate::tensor::TensorError::Format(format!(
                "persisted system uses stepping weights {:?}, this build {:?}",
                manifest.bdf2_weights, expected
            ))));
        }
        let read = |name: &str| -> Result<DMat> {
            let mut r = BufReader::new(File::open(dir.join(name)).map_err(tensor_io)?);
            Ok(read_dense(&mut r)?)
        };
        let boundaries = manifest.multiplier_dims.len();
        Ok(ReducedGalerkinSystem {
            spatial: SpaceReducedBlocks {
                m: read("mass.bin")?,
                a: read("stiffness.bin")?,
                b: read("divergence.bin")?,
                bt: read("gradient.bin")?,
                c: read("trace.bin")?,
                ct: read("trace_adjoint.bin")?,
            },
            coupling_up: read("coupling_up.bin")?,
            coupling_ul: (1..=boundaries)
                .map(|k| read(&format!("coupling_ul_{k}.bin")))
                .collect::<Result<_>>()?,
            gram1: read("gram1.bin")?,
            gram2: read("gram2.bin")?,
            multiplier_time: (1..=boundaries)
                .map(|k| read(&format!("multiplier_time_{k}.bin")))
                .collect::<Result<_>>()?,
            multiplier_dims: manifest.multiplier_dims,
            a_st: read("system.bin")?,
            delta: manifest.delta,
            layout: manifest.layout,
        })
    }

    fn named_matrices(&self) -> Vec<(String, &DMat)> {
        let mut mats: Vec<(String, &DMat)> = vec![
            ("mass.bin".into(), &self.spatial.m),
            ("stiffness.bin".into(), &self.spatial.a),
            ("divergence.bin".into(), &self.spatial.b),
            ("gradient.bin".into(), &self.spatial.bt),
            ("trace.bin".into(), &self.spatial.c),
            ("trace_adjoint.bin".into(), &self.spatial.ct),
            ("coupling_up.bin".into(), &self.coupling_up),
            ("gram1.bin".into(), &self.gram1),
            ("gram2.bin".into(), &self.gram2),
            ("system.bin".into(), &self.a_st),
        ];
        for (k, m) in self.coupling_ul.iter().enumerate() {
            mats.push((format!("coupling_ul_{}.bin", k + 1), m));
        }
        for (k, m) in self.multiplier_time.iter().enumerate() {
            mats.push((format!("multiplier_time_{}.bin", k + 1), m));
        }
        mats
    }
}

fn tensor_io(e: std::io::Error) -> GalerkinError {
    GalerkinError::Tensor(e.into())
}

fn json_format(e: serde_json::Error) -> GalerkinError {
    GalerkinError::Tensor(crate::tensor::TensorError::Format(e.to_string()))
}
