//! Normal-equation assembly of the least-squares space-time system, its
//! online loads, and the symmetric solve.
//!
//! The normal matrix is a Gram matrix of the half-projected stepping
//! operator under the inverse surrogate weight. Grouping its entries by
//! pairs of operator blocks factors each group into a small spatial kernel
//! — two half-reduced factors contracted over full-order rows, computed
//! once — times a temporal window: an identity where both factors sit on
//! the step diagonal, a shifted Gramian where one or both reach into the
//! stepping history, restricted to the steps both can reach. Only momentum
//! rows carry history, so only the velocity time basis is ever shifted;
//! the divergence and trace rows contribute plain Grams that land in the
//! velocity-velocity block, which is what makes the assembled matrix
//! definite without any enrichment of the bases.

use super::{dimension_error, NormSurrogate, PetrovError, Result};
use crate::fom::{DirichletDatum, FomSpatialBlocks, ParameterVector, TimeGrid};
use crate::galerkin::{kron_into, OnlineRhs, ReducedLayout, RomSolution};
use crate::galerkin::{CONDITION_LIMIT, RESIDUAL_LIMIT};
use crate::pod::SpaceTimeBasis;
use crate::tensor::{cross_shifted_gramian, lu_condition_estimate, read_dense, write_dense};
use crate::{DMat, DVec};
use nalgebra::linalg::{Cholesky, LU};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

/// Manifest tag distinguishing this operator from the Galerkin one; the
/// two persist the same way but must never be confused at load time.
const PROJECTION_TAG: &str = "petrov-galerkin";

/// Spatial operator blocks with only their trial side contracted: rows keep
/// the full-order dimension, columns are reduced. These are the factors the
/// normal-equation kernels are built from, kept for diagnostics and
/// persistence — the online phase never touches the full-row ones.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfReducedBlocks {
    /// Wall-treated mass against the velocity modes.
    pub m: DMat,
    /// Wall-treated stiffness against the velocity modes.
    pub a: DMat,
    /// The step combination `m + (2/3) delta a` every momentum row applies.
    pub step: DMat,
    /// Divergence rows against the velocity modes.
    pub b: DMat,
    /// Wall-treated pressure gradient against the pressure modes.
    pub bt: DMat,
    /// Trace rows against the velocity modes — also the online load kernel.
    pub c: DMat,
    /// Wall-treated trace coupling, kept at full multiplier width.
    pub ct: DMat,
}

/// Offline-assembled least-squares operator with its factors. Parameter
/// independent; immutable; shared freely across online queries.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPGSystem {
    pub half: HalfReducedBlocks,
    /// Velocity time basis, for projecting boundary waveforms online.
    pub velocity_time: DMat,
    /// Spatial size of each multiplier block.
    pub multiplier_dims: Vec<usize>,
    /// Surrogate weight of the multiplier block — ones unless a caller
    /// supplied something unusual; the online load divides by it.
    pub multiplier_weight: DVec,
    /// The assembled normal matrix.
    pub a_pg: DMat,
    pub delta: f64,
    pub layout: ReducedLayout,
}

/// `m` with row `i` scaled by `s[i]` — the half of the inverse weight each
/// factor of a symmetric contraction absorbs.
fn row_scaled(m: &DMat, s: &DVec) -> DMat {
    DMat::from_fn(m.nrows(), m.ncols(), |i, j| s[i] * m[(i, j)])
}

/// Assembles the normal-equation operator. The bases need no enrichment of
/// any kind: the result is positive definite for every basis whose columns
/// are independent, which orthonormal POD factors guarantee.
pub fn assemble_stpgrb(
    bases: &SpaceTimeBasis,
    blocks: &FomSpatialBlocks,
    grid: &TimeGrid,
    surrogate: &NormSurrogate,
) -> Result<ReducedPGSystem> {
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
    if grid.n_t < 3 {
        return Err(dimension_error(format!(
            "the two-step march needs at least 3 steps, grid has {}",
            grid.n_t
        )));
    }
    if surrogate.velocity.len() != blocks.n_u
        || surrogate.pressure.len() != blocks.n_p
        || surrogate.multiplier.len() != blocks.n_lambda
    {
        return Err(dimension_error(format!(
            "surrogate sized ({}, {}, {}), the model ({}, {}, {})",
            surrogate.velocity.len(),
            surrogate.pressure.len(),
            surrogate.multiplier.len(),
            blocks.n_u,
            blocks.n_p,
            blocks.n_lambda
        )));
    }
    surrogate.validate()?;

    let delta = grid.delta();
    let bd = TimeGrid::BETA * delta;
    let phi_u = &bases.velocity_space.phi;
    let phi_p = &bases.pressure_space.phi;
    if phi_u.nrows() != blocks.n_u || phi_p.nrows() != blocks.n_p {
        return Err(dimension_error(format!(
            "space bases sized ({}, {}), the model ({}, {})",
            phi_u.nrows(),
            phi_p.nrows(),
            blocks.n_u,
            blocks.n_p
        )));
    }

    let m = blocks.m.matmul_dense(phi_u);
    let a = blocks.a.matmul_dense(phi_u);
    let step = &m + bd * &a;
    let half = HalfReducedBlocks {
        m,
        a,
        step,
        b: blocks.b.matmul_dense(phi_u),
        bt: blocks.bt_bc.matmul_dense(phi_p),
        c: blocks.c.matmul_dense(phi_u),
        ct: blocks.ct_bc.to_dense(),
    };

    // Each factor absorbs half of the inverse weight of the rows it lives
    // on, so every kernel below is a plain product — and symmetric kernels
    // come out symmetric entry for entry.
    let isq_u = NormSurrogate::inverse_sqrt(&surrogate.velocity);
    let isq_p = NormSurrogate::inverse_sqrt(&surrogate.pressure);
    let isq_l = NormSurrogate::inverse_sqrt(&surrogate.multiplier);
    let s_step = row_scaled(&half.step, &isq_u);
    let s_m = row_scaled(&half.m, &isq_u);
    let s_bt = row_scaled(&half.bt, &isq_u);
    let s_ct = row_scaled(&half.ct, &isq_u);
    let s_b = row_scaled(&half.b, &isq_p);
    let s_c = row_scaled(&half.c, &isq_l);

    let k_step_step = s_step.transpose() * &s_step;
    let k_mm = s_m.transpose() * &s_m;
    let k_step_m = s_step.transpose() * &s_m;
    let k_bb = s_b.transpose() * &s_b;
    let k_cc_trace = s_c.transpose() * &s_c;
    let k_step_bt = s_step.transpose() * &s_bt;
    let k_m_bt = s_m.transpose() * &s_bt;
    let k_step_ct = s_step.transpose() * &s_ct;
    let k_m_ct = s_m.transpose() * &s_ct;
    let k_btbt = s_bt.transpose() * &s_bt;
    let k_bt_ct = s_bt.transpose() * &s_ct;
    let k_ctct = s_ct.transpose() * &s_ct;

    // Temporal windows. Only the momentum rows look back in time, so every
    // shift involves the velocity time basis; the window length is the
    // number of steps both shifted factors reach.
    let nt = grid.n_t;
    let psi_u = &bases.velocity_time.psi;
    let psi_p = &bases.pressure_time.psi;
    let g11 = cross_shifted_gramian(psi_u, psi_u, 0, 0, nt - 1);
    let g22 = cross_shifted_gramian(psi_u, psi_u, 0, 0, nt - 2);
    let g12 = cross_shifted_gramian(psi_u, psi_u, 1, 0, nt - 2);
    let h1 = cross_shifted_gramian(psi_u, psi_u, 1, 0, nt - 1);
    let h2 = cross_shifted_gramian(psi_u, psi_u, 2, 0, nt - 2);
    let u_full = psi_u.transpose() * psi_p;
    let u1 = cross_shifted_gramian(psi_u, psi_p, 0, 1, nt - 1);
    let u2 = cross_shifted_gramian(psi_u, psi_p, 0, 2, nt - 2);

    let layout = ReducedLayout::from_basis(bases);
    let n_vt = bases.velocity_time.n_modes();
    let n_pt = bases.pressure_time.n_modes();
    let eye_v = DMat::identity(n_vt, n_vt);
    // Step-diagonal coefficient is one; the history coefficients enter with
    // the sign they carry in the stepping operator.
    let c1 = -TimeGrid::ALPHA1;
    let c2 = -TimeGrid::ALPHA2;
    let mut a_pg = DMat::zeros(layout.total(), layout.total());

    // Velocity-velocity: the momentum-row Gram of step and history terms,
    // plus the divergence- and trace-row Grams, which see only velocity.
    kron_into(&mut a_pg, 0, 0, &k_step_step, &eye_v, 1.0);
    kron_into(&mut a_pg, 0, 0, &k_step_m, &h1, c1);
    kron_into(&mut a_pg, 0, 0, &k_step_m.transpose(), &h1.transpose(), c1);
    kron_into(&mut a_pg, 0, 0, &k_step_m, &h2, c2);
    kron_into(&mut a_pg, 0, 0, &k_step_m.transpose(), &h2.transpose(), c2);
    kron_into(&mut a_pg, 0, 0, &k_mm, &g11, c1 * c1);
    kron_into(&mut a_pg, 0, 0, &k_mm, &g22, c2 * c2);
    kron_into(&mut a_pg, 0, 0, &k_mm, &g12, c1 * c2);
    kron_into(&mut a_pg, 0, 0, &k_mm, &g12.transpose(), c1 * c2);
    kron_into(&mut a_pg, 0, 0, &k_bb, &eye_v, 1.0);
    kron_into(&mut a_pg, 0, 0, &k_cc_trace, &eye_v, 1.0);

    // Velocity-pressure: momentum rows pairing history with the weighted
    // pressure gradient.
    let p0 = layout.pressure_range().start;
    kron_into(&mut a_pg, 0, p0, &k_step_bt, &u_full, bd);
    kron_into(&mut a_pg, 0, p0, &k_m_bt, &u1, bd * c1);
    kron_into(&mut a_pg, 0, p0, &k_m_bt, &u2, bd * c2);

    // Pressure-pressure: the gradient only ever sits on the step diagonal.
    kron_into(&mut a_pg, p0, p0, &k_btbt, &DMat::identity(n_pt, n_pt), bd * bd);

    // Multiplier couplings, boundary by boundary.
    let mut off = 0;
    for (k, &dim) in bases.multiplier_dims.iter().enumerate() {
        let psi_k = &bases.multiplier_time[k].psi;
        let l0 = layout.multiplier_block_range(k).start;
        let v_full = psi_u.transpose() * psi_k;
        let v1 = cross_shifted_gramian(psi_u, psi_k, 0, 1, nt - 1);
        let v2 = cross_shifted_gramian(psi_u, psi_k, 0, 2, nt - 2);
        kron_into(&mut a_pg, 0, l0, &k_step_ct.columns(off, dim).into_owned(), &v_full, bd);
        kron_into(&mut a_pg, 0, l0, &k_m_ct.columns(off, dim).into_owned(), &v1, bd * c1);
        kron_into(&mut a_pg, 0, l0, &k_m_ct.columns(off, dim).into_owned(), &v2, bd * c2);
        kron_into(
            &mut a_pg,
            p0,
            l0,
            &k_bt_ct.columns(off, dim).into_owned(),
            &(psi_p.transpose() * psi_k),
            bd * bd,
        );
        let mut off2 = off;
        for k2 in k..bases.multiplier_dims.len() {
            let dim2 = bases.multiplier_dims[k2];
            let kernel = k_ctct.view((off, off2), (dim, dim2)).into_owned();
            let temporal = if k2 == k {
                DMat::identity(psi_k.ncols(), psi_k.ncols())
            } else {
                psi_k.transpose() * &bases.multiplier_time[k2].psi
            };
            let l0c = layout.multiplier_block_range(k2).start;
            kron_into(&mut a_pg, l0, l0c, &kernel, &temporal, bd * bd);
            off2 += dim2;
        }
        off += dim;
    }

    // The matrix is a Gram matrix, so the strictly-lower triangle equals
    // the upper one; enforcing the identity bitwise costs nothing and
    // spares every downstream symmetry check an epsilon.
    for c in 0..layout.total() {
        for r in (c + 1)..layout.total() {
            a_pg[(r, c)] = a_pg[(c, r)];
        }
    }

    Ok(ReducedPGSystem {
        half,
        velocity_time: psi_u.clone(),
        multiplier_dims: bases.multiplier_dims.clone(),
        multiplier_weight: surrogate.multiplier.clone(),
        a_pg,
        delta,
        layout,
    })
}

/// Projects the boundary waveform for one parameter query. The normal-form
/// load inherits the sparsity of the full load: the full system is forced
/// only on its trace rows, and those rows act on velocity columns alone, so
/// only the velocity block comes out nonzero — the pressure and multiplier
/// blocks are exact zeros, not small ones.
pub fn online_rhs_stpgrb(
    system: &ReducedPGSystem,
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
    let nt = system.velocity_time.nrows();
    let n_vt = system.velocity_time.ncols();
    let n_su = system.half.c.ncols();
    let mut f_hat = DVec::zeros(system.layout.total());
    let mut off = 0;
    for (k, &dim) in system.multiplier_dims.iter().enumerate() {
        // Waveform at the step targets t_1 ... t_{N^t}, contracted against
        // the velocity time basis.
        let samples = DVec::from_fn(nt, |j, _| {
            datum.g_t((k + 1) as u8, (j + 1) as f64 * system.delta, mu)
        });
        let tau = system.velocity_time.transpose() * samples;
        // Spatial kernel: trace rows of this boundary against the velocity
        // modes, weighted by the inverse multiplier surrogate.
        let weighted = DVec::from_fn(dim, |a, _| {
            datum.spatial[k][a] / system.multiplier_weight[off + a]
        });
        let kappa = system.half.c.rows(off, dim).transpose() * weighted;
        for i_s in 0..n_su {
            for i_t in 0..n_vt {
                f_hat[i_s * n_vt + i_t] += kappa[i_s] * tau[i_t];
            }
        }
        off += dim;
    }
    Ok(OnlineRhs { f_hat, extrapolated: !mu.in_default_domain() })
}

/// Symmetric dense solve of the normal equations. Positive definiteness is
/// established by the factorization itself; if the pivots refuse — which
/// takes a basis with dependent columns, since the full operator is
/// nonsingular — pivoted elimination decides between a merely borderline
/// matrix and a genuinely rank-deficient one.
pub fn solve_stpgrb(system: &ReducedPGSystem, rhs: &OnlineRhs) -> Result<RomSolution> {
    if rhs.f_hat.len() != system.layout.total() {
        return Err(dimension_error(format!(
            "load vector has length {}, the system {}",
            rhs.f_hat.len(),
            system.layout.total()
        )));
    }
    let w_hat = match Cholesky::new(system.a_pg.clone()) {
        Some(factor) => factor.solve(&rhs.f_hat),
        None => {
            let lu = LU::new(system.a_pg.clone());
            let estimate = lu_condition_estimate(&lu);
            if estimate > CONDITION_LIMIT {
                return Err(PetrovError::IllConditioned { estimate });
            }
            lu.solve(&rhs.f_hat)
                .ok_or(PetrovError::IllConditioned { estimate: f64::INFINITY })?
        }
    };
    let residual = (&system.a_pg * &w_hat - &rhs.f_hat).norm();
    // Backward-stable scale, as for the Galerkin solve.
    let scale = rhs.f_hat.norm().max(system.a_pg.norm() * w_hat.norm()).max(1.0);
    if residual > RESIDUAL_LIMIT * scale {
        return Err(PetrovError::UnreliableSolve { residual: residual / scale });
    }
    Ok(RomSolution::new(w_hat, system.layout.clone()))
}

/// Sidecar describing the persisted system. The projection tag keeps the
/// two reduced-operator kinds from masquerading as one another; the
/// stepping weights record which convention the operator encodes.
#[derive(Debug, Serialize, Deserialize)]
struct PgManifest {
    projection: String,
    delta: f64,
    bdf2_weights: [f64; 3],
    multiplier_dims: Vec<usize>,
    layout: ReducedLayout,
}

impl ReducedPGSystem {
    /// Writes the operator and all its factors as binary artifacts plus a
    /// JSON manifest.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(crate::tensor::TensorError::from)?;
        for (name, m) in self.named_matrices() {
            let mut w = BufWriter::new(File::create(dir.join(name)).map_err(tensor_io)?);
            write_dense(&mut w, m)?;
        }
        let weight = DMat::from_column_slice(self.multiplier_weight.len(), 1, self.multiplier_weight.as_slice());
        let mut w = BufWriter::new(File::create(dir.join("multiplier_weight.bin")).map_err(tensor_io)?);
        write_dense(&mut w, &weight)?;
        let manifest = PgManifest {
            projection: PROJECTION_TAG.into(),
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
        let manifest: PgManifest =
            serde_json::from_reader(BufReader::new(f)).map_err(json_format)?;
        if manifest.projection != PROJECTION_TAG {
            return Err(format_error(format!(
                "persisted system carries projection tag {:?}, this loader reads {PROJECTION_TAG:?}",
                manifest.projection
            )));
        }
        let expected = [TimeGrid::ALPHA1, TimeGrid::ALPHA2, TimeGrid::BETA];
        if manifest.bdf2_weights != expected {
            return Err(format_error(format!(
                "persisted system uses stepping weights {:?}, this build {:?}",
                manifest.bdf2_weights, expected
            )));
        }
        let read = |name: &str| -> Result<DMat> {
            let mut r = BufReader::new(File::open(dir.join(name)).map_err(tensor_io)?);
            Ok(read_dense(&mut r)?)
        };
        let weight = read("multiplier_weight.bin")?;
        Ok(ReducedPGSystem {
            half: HalfReducedBlocks {
                m: read("mass.bin")?,
                a: read("stiffness.bin")?,
                step: read("step.bin")?,
                b: read("divergence.bin")?,
                bt: read("gradient.bin")?,
                c: read("trace.bin")?,
                ct: read("trace_adjoint.bin")?,
            },
            velocity_time: read("velocity_time.bin")?,
            multiplier_dims: manifest.multiplier_dims,
            multiplier_weight: DVec::from_column_slice(weight.column(0).as_slice()),
            a_pg: read("system.bin")?,
            delta: manifest.delta,
            layout: manifest.layout,
        })
    }

    fn named_matrices(&self) -> Vec<(&'static str, &DMat)> {
        vec![
            ("mass.bin", &self.half.m),
            ("stiffness.bin", &self.half.a),
            ("step.bin", &self.half.step),
            ("divergence.bin", &self.half.b),
            ("gradient.bin", &self.half.bt),
            ("trace.bin", &self.half.c),
            ("trace_adjoint.bin", &self.half.ct),
            ("velocity_time.bin", &self.velocity_time),
            ("system.bin", &self.a_pg),
        ]
    }
}

fn tensor_io(e: std::io::Error) -> PetrovError {
    PetrovError::Tensor(e.into())
}

fn json_format(e: serde_json::Error) -> PetrovError {
    format_error(e.to_string())
}

fn format_error(msg: String) -> PetrovError {
    PetrovError::Tensor(crate::tensor::TensorError::Format(msg))
}
