//! The factored space-time trial basis and its bookkeeping.
//!
//! A space-time basis column for a field is the pairing of one spatial and
//! one temporal mode: its value at spatial unknown `a` and step `j` is
//! `phi[a] * psi[j]`. Columns are numbered time-fastest within each field
//! block, blocks ordered velocity, pressure, then one block per constrained
//! boundary. Nothing is stored expanded; `materialize` exists for
//! brute-force checks on small instances and writes rows in the monolithic
//! ordering of the full-order system (fields outermost, steps next,
//! unknowns innermost).

use super::{PodError, Result, SpaceBasis, TimeBasis};
use crate::tensor::{read_dense, write_dense, SparseMatrix, Truncation};
use crate::{DMat, DVec};
use serde::{Deserialize, Serialize};
use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::ops::Range;
use std::path::Path;

/// Factored trial basis for all fields. The multiplier spatial basis is
/// the identity on each boundary block, so only temporal bases and block
/// sizes are kept for it.
#[derive(Debug, Clone)]
pub struct SpaceTimeBasis {
    pub velocity_space: SpaceBasis,
    pub velocity_time: TimeBasis,
    pub pressure_space: SpaceBasis,
    pub pressure_time: TimeBasis,
    /// Spatial size of each multiplier block, in boundary order.
    pub multiplier_dims: Vec<usize>,
    pub multiplier_time: Vec<TimeBasis>,
}

/// Checks the pieces fit together and wraps them. Every basis must be
/// nonempty and all temporal bases must share the step count.
pub fn assemble_space_time_basis(
    velocity: (SpaceBasis, TimeBasis),
    pressure: (SpaceBasis, TimeBasis),
    multiplier_dims: Vec<usize>,
    multiplier_time: Vec<TimeBasis>,
) -> Result<SpaceTimeBasis> {
    let checks: [(&str, usize); 4] = [
        ("velocity space", velocity.0.n_modes()),
        ("velocity time", velocity.1.n_modes()),
        ("pressure space", pressure.0.n_modes()),
        ("pressure time", pressure.1.n_modes()),
    ];
    for (part, count) in checks {
        if count == 0 {
            return Err(PodError::EmptyBasis { part });
        }
    }
    if multiplier_dims.len() != multiplier_time.len() {
        return Err(PodError::MultiplierCount {
            dims: multiplier_dims.len(),
            bases: multiplier_time.len(),
        });
    }
    if multiplier_dims.iter().any(|&d| d == 0) {
        return Err(PodError::EmptyBasis { part: "multiplier space" });
    }
    let steps = velocity.1.n_steps();
    for tb in std::iter::once(&pressure.1).chain(multiplier_time.iter()) {
        if tb.n_modes() == 0 {
            return Err(PodError::EmptyBasis { part: "multiplier time" });
        }
        if tb.n_steps() != steps {
            return Err(PodError::StepMismatch { expected: steps, found: tb.n_steps() });
        }
    }
    Ok(SpaceTimeBasis {
        velocity_space: velocity.0,
        velocity_time: velocity.1,
        pressure_space: pressure.0,
        pressure_time: pressure.1,
        multiplier_dims,
        multiplier_time,
    })
}

impl SpaceTimeBasis {
    /// Column number of the pairing of spatial mode `i` and temporal mode
    /// `j` within a field block holding `n_time_modes` temporal modes; the
    /// temporal index runs fastest.
    pub fn flat_index(i: usize, j: usize, n_time_modes: usize) -> usize {
        i * n_time_modes + j
    }

    /// Steps of the underlying time grid.
    pub fn n_steps(&self) -> usize {
        self.velocity_time.n_steps()
    }

    pub fn velocity_count(&self) -> usize {
        self.velocity_space.n_modes() * self.velocity_time.n_modes()
    }

    pub fn pressure_count(&self) -> usize {
        self.pressure_space.n_modes() * self.pressure_time.n_modes()
    }

    /// Reduced unknowns of multiplier block `idx` (0-based, boundary
    /// `idx + 1`).
    pub fn multiplier_count(&self, idx: usize) -> usize {
        self.multiplier_dims[idx] * self.multiplier_time[idx].n_modes()
    }

    pub fn multiplier_total(&self) -> usize {
        (0..self.multiplier_dims.len()).map(|i| self.multiplier_count(i)).sum()
    }

    pub fn total(&self) -> usize {
        self.velocity_count() + self.pressure_count() + self.multiplier_total()
    }

    pub fn velocity_range(&self) -> Range<usize> {
        0..self.velocity_count()
    }

    pub fn pressure_range(&self) -> Range<usize> {
        let start = self.velocity_count();
        start..start + self.pressure_count()
    }

    pub fn multiplier_block_range(&self, idx: usize) -> Range<usize> {
        let mut start = self.velocity_count() + self.pressure_count();
        for i in 0..idx {
            start += self.multiplier_count(i);
        }
        start..start + self.multiplier_count(idx)
    }

    pub fn materialize_velocity(&self) -> DMat {
        materialize_pair(&self.velocity_space.phi, &self.velocity_time.psi)
    }

    pub fn materialize_pressure(&self) -> DMat {
        materialize_pair(&self.pressure_space.phi, &self.pressure_time.psi)
    }

    pub fn materialize_multiplier(&self, idx: usize) -> DMat {
        let dim = self.multiplier_dims[idx];
        materialize_pair(&DMat::identity(dim, dim), &self.multiplier_time[idx].psi)
    }

    /// Expands the whole basis. Rows follow the monolithic space-time
    /// ordering, where the multiplier segment stacks the full multiplier
    /// vector per step with boundary blocks concatenated inside it. Meant
    /// for small instances only; the result has
    /// (unknowns x steps) rows.
    pub fn materialize(&self) -> DMat {
        let steps = self.n_steps();
        let n_u = self.velocity_space.phi.nrows();
        let n_p = self.pressure_space.phi.nrows();
        let n_l: usize = self.multiplier_dims.iter().sum();
        let mut m = DMat::zeros((n_u + n_p + n_l) * steps, self.total());
        m.view_mut((0, 0), (n_u * steps, self.velocity_count()))
            .copy_from(&self.materialize_velocity());
        m.view_mut((n_u * steps, self.velocity_count()), (n_p * steps, self.pressure_count()))
            .copy_from(&self.materialize_pressure());
        let l0 = (n_u + n_p) * steps;
        let mut row_off = 0;
        for (idx, tb) in self.multiplier_time.iter().enumerate() {
            let dim = self.multiplier_dims[idx];
            let col0 = self.multiplier_block_range(idx).start;
            for a in 0..dim {
                for jt in 0..tb.n_modes() {
                    let col = col0 + Self::flat_index(a, jt, tb.n_modes());
                    for j in 0..steps {
                        m[(l0 + j * n_l + row_off + a, col)] = tb.psi[(j, jt)];
                    }
                }
            }
            row_off += dim;
        }
        m
    }

    /// Expands reduced coefficients into per-field trajectories (unknowns
    /// by steps), working entirely on the factors.
    pub fn reconstruct(&self, w_hat: &DVec) -> Result<SpaceTimeFields> {
        if w_hat.len() != self.total() {
            return Err(PodError::CoefficientLength {
                expected: self.total(),
                found: w_hat.len(),
            });
        }
        let s = w_hat.as_slice();
        let velocity =
            field_reconstruct(&self.velocity_space.phi, &self.velocity_time.psi, &s[self.velocity_range()]);
        let pressure =
            field_reconstruct(&self.pressure_space.phi, &self.pressure_time.psi, &s[self.pressure_range()]);
        let n_l: usize = self.multiplier_dims.iter().sum();
        let mut multiplier = DMat::zeros(n_l, self.n_steps());
        let mut off = 0;
        for (idx, tb) in self.multiplier_time.iter().enumerate() {
            let dim = self.multiplier_dims[idx];
            let w = DMat::from_column_slice(tb.n_modes(), dim, &s[self.multiplier_block_range(idx)]);
            multiplier.rows_mut(off, dim).copy_from(&(&tb.psi * w).transpose());
            off += dim;
        }
        Ok(SpaceTimeFields { velocity, pressure, multiplier })
    }

    /// Writes the factor matrices as binary artifacts plus a JSON sidecar
    /// with the metadata (norm tags, truncations, spectra, block sizes).
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        write_mat(&dir.join("velocity_space.bin"), &self.velocity_space.phi)?;
        write_mat(&dir.join("velocity_time.bin"), &self.velocity_time.psi)?;
        write_mat(&dir.join("pressure_space.bin"), &self.pressure_space.phi)?;
        write_mat(&dir.join("pressure_time.bin"), &self.pressure_time.psi)?;
        for (i, tb) in self.multiplier_time.iter().enumerate() {
            write_mat(&dir.join(format!("multiplier_time_{}.bin", i + 1)), &tb.psi)?;
        }
        let sidecar = Sidecar {
            velocity_space: space_meta(&self.velocity_space),
            velocity_time: time_meta(&self.velocity_time),
            pressure_space: space_meta(&self.pressure_space),
            pressure_time: time_meta(&self.pressure_time),
            multiplier_dims: self.multiplier_dims.clone(),
            multiplier_time: self.multiplier_time.iter().map(time_meta).collect(),
        };
        let f = File::create(dir.join("basis.json"))?;
        serde_json::to_writer_pretty(BufWriter::new(f), &sidecar)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let f = File::open(dir.join("basis.json"))?;
        let sc: Sidecar = serde_json::from_reader(BufReader::new(f))?;
        let velocity = (
            restore_space(&sc.velocity_space, read_mat(&dir.join("velocity_space.bin"))?),
            restore_time(&sc.velocity_time, read_mat(&dir.join("velocity_time.bin"))?),
        );
        let pressure = (
            restore_space(&sc.pressure_space, read_mat(&dir.join("pressure_space.bin"))?),
            restore_time(&sc.pressure_time, read_mat(&dir.join("pressure_time.bin"))?),
        );
        let mut multiplier_time = Vec::new();
        for (i, meta) in sc.multiplier_time.iter().enumerate() {
            let psi = read_mat(&dir.join(format!("multiplier_time_{}.bin", i + 1)))?;
            multiplier_time.push(restore_time(meta, psi));
        }
        assemble_space_time_basis(velocity, pressure, sc.multiplier_dims, multiplier_time)
    }
}

/// Per-field trajectories expanded from reduced coefficients. The
/// multiplier rows stack the boundary blocks in order.
#[derive(Debug, Clone)]
pub struct SpaceTimeFields {
    pub velocity: DMat,
    pub pressure: DMat,
    pub multiplier: DMat,
}

impl SpaceTimeFields {
    /// One matrix with the monolithic row order: velocity, pressure,
    /// multiplier.
    pub fn stacked(&self) -> DMat {
        let rows = self.velocity.nrows() + self.pressure.nrows() + self.multiplier.nrows();
        let mut m = DMat::zeros(rows, self.velocity.ncols());
        m.rows_mut(0, self.velocity.nrows()).copy_from(&self.velocity);
        m.rows_mut(self.velocity.nrows(), self.pressure.nrows()).copy_from(&self.pressure);
        m.rows_mut(self.velocity.nrows() + self.pressure.nrows(), self.multiplier.nrows())
            .copy_from(&self.multiplier);
        m
    }
}

/// The norm a block-diagonal repetition of `x` over steps induces on a
/// trajectory stored unknowns by steps.
pub fn trajectory_norm(x: &SparseMatrix, traj: &DMat) -> f64 {
    let mut sq = 0.0;
    for j in 0..traj.ncols() {
        let col = traj.column(j).clone_owned();
        sq += x.bilinear(&col, &col);
    }
    sq.max(0.0).sqrt()
}

fn field_reconstruct(phi: &DMat, psi: &DMat, coeffs: &[f64]) -> DMat {
    // Coefficients reshape time-fastest into one column per spatial mode.
    let w = DMat::from_column_slice(psi.ncols(), phi.ncols(), coeffs);
    phi * (psi * w).transpose()
}

fn materialize_pair(phi: &DMat, psi: &DMat) -> DMat {
    let (n_f, n_s) = (phi.nrows(), phi.ncols());
    let (steps, n_t) = (psi.nrows(), psi.ncols());
    let mut m = DMat::zeros(n_f * steps, n_s * n_t);
    for i in 0..n_s {
        for jt in 0..n_t {
            let col = SpaceTimeBasis::flat_index(i, jt, n_t);
            for j in 0..steps {
                for a in 0..n_f {
                    m[(j * n_f + a, col)] = phi[(a, i)] * psi[(j, jt)];
                }
            }
        }
    }
    m
}

fn write_mat(path: &Path, m: &DMat) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_dense(&mut w, m)?;
    Ok(())
}

fn read_mat(path: &Path) -> Result<DMat> {
    let mut r = BufReader::new(File::open(path)?);
    Ok(read_dense(&mut r)?)
}

#[derive(Serialize, Deserialize)]
struct BasisMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    norm: Option<super::NormTag>,
    truncation: Truncation,
    sigma: Vec<f64>,
    spectrum: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Sidecar {
    velocity_space: BasisMeta,
    velocity_time: BasisMeta,
    pressure_space: BasisMeta,
    pressure_time: BasisMeta,
    multiplier_dims: Vec<usize>,
    multiplier_time: Vec<BasisMeta>,
}

fn space_meta(b: &SpaceBasis) -> BasisMeta {
    BasisMeta {
        norm: Some(b.norm),
        truncation: b.truncation,
        sigma: b.sigma.as_slice().to_vec(),
        spectrum: b.spectrum.as_slice().to_vec(),
    }
}

fn time_meta(b: &TimeBasis) -> BasisMeta {
    BasisMeta {
        norm: None,
        truncation: b.truncation,
        sigma: b.sigma.as_slice().to_vec(),
        spectrum: b.spectrum.as_slice().to_vec(),
    }
}

fn restore_space(meta: &BasisMeta, phi: DMat) -> SpaceBasis {
    SpaceBasis {
        phi,
        norm: meta.norm.unwrap_or(super::NormTag::Euclidean),
        sigma: DVec::from_vec(meta.sigma.clone()),
        spectrum: DVec::from_vec(meta.spectrum.clone()),
        truncation: meta.truncation,
    }
}

fn restore_time(meta: &BasisMeta, psi: DMat) -> TimeBasis {
    TimeBasis {
        psi,
        sigma: DVec::from_vec(meta.sigma.clone()),
        spectrum: DVec::from_vec(meta.spectrum.clone()),
        truncation: meta.truncation,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::{FomSpatialBlocks, TimeGrid};
    use crate::pod::{spatial_pod, split_fields, temporal_pod, NormTag};
    use crate::testsupport::{march_trajectories, spread_parameters, tiny_instance};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn pod_pair(
        chi: &crate::pod::SnapshotTensor,
        x: &SparseMatrix,
        norm: NormTag,
    ) -> (SpaceBasis, TimeBasis) {
        (
            spatial_pod(chi, x, norm, Truncation::Energy(1e-8)).unwrap(),
            temporal_pod(chi, Truncation::Energy(1e-8)).unwrap(),
        )
    }

    fn tiny_basis() -> (FomSpatialBlocks, SpaceTimeBasis) {
        let (blocks, datum) = tiny_instance();
        let grid = TimeGrid::new(1.0, 5).unwrap();
        let params = spread_parameters(3, 6);
        let trajs = march_trajectories(&blocks, &datum, &grid, &params);
        let fields = split_fields(&blocks, &trajs, &params).unwrap();
        let velocity = pod_pair(&fields.velocity, &blocks.x_u, NormTag::Velocity);
        let pressure = pod_pair(&fields.pressure, &blocks.x_p, NormTag::Pressure);
        let mt: Vec<TimeBasis> = fields
            .multipliers
            .iter()
            .map(|s| temporal_pod(s, Truncation::Energy(1e-8)).unwrap())
            .collect();
        let basis =
            assemble_space_time_basis(velocity, pressure, blocks.multiplier_sizes(), mt)
                .unwrap();
        (blocks, basis)
    }

    fn unit_bases() -> (SpaceBasis, TimeBasis, SpaceBasis, TimeBasis, TimeBasis) {
        let mk_space = |vals: &[f64]| SpaceBasis {
            phi: DMat::from_column_slice(vals.len(), 1, vals),
            norm: NormTag::Euclidean,
            sigma: DVec::from_element(1, 1.0),
            spectrum: DVec::from_element(1, 1.0),
            truncation: Truncation::Rank(1),
        };
        let mk_time = |vals: &[f64]| TimeBasis {
            psi: DMat::from_column_slice(vals.len(), 1, vals),
            sigma: DVec::from_element(1, 1.0),
            spectrum: DVec::from_element(1, 1.0),
            truncation: Truncation::Rank(1),
        };
        (
            mk_space(&[1.0, 2.0, 3.0]),
            mk_time(&[0.5, -0.25]),
            mk_space(&[4.0, -1.0]),
            mk_time(&[1.0, 2.0]),
            mk_time(&[-3.0, 0.5]),
        )
    }

    #[test]
    fn single_pair_materializes_to_the_kronecker_column() {
        let (vs, vt, ps, pt, mt) = unit_bases();
        let phi = vs.phi.clone();
        let psi = vt.psi.clone();
        let b = assemble_space_time_basis((vs, vt), (ps, pt), vec![1], vec![mt]).unwrap();
        let m = b.materialize_velocity();
        assert_eq!((m.nrows(), m.ncols()), (6, 1));
        for j in 0..2 {
            for a in 0..3 {
                assert_eq!(m[(j * 3 + a, 0)], phi[(a, 0)] * psi[(j, 0)]);
            }
        }
        assert_eq!(b.total(), 3);
    }

    #[test]
    fn kronecker_norm_factorizes_into_space_and_time_parts() {
        let (blocks, basis) = tiny_basis();
        let steps = basis.n_steps();
        for (i, jt) in [(0, 0), (1, 1), (2, 0)] {
            let phi = basis.velocity_space.phi.column(i).clone_owned();
            let psi = basis.velocity_time.psi.column(jt).clone_owned();
            let traj = DMat::from_fn(blocks.n_u, steps, |a, j| phi[a] * psi[j]);
            let lhs = trajectory_norm(&blocks.x_u, &traj);
            let rhs = blocks.x_u.bilinear(&phi, &phi).sqrt() * psi.norm();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
        }
    }

    #[test]
    fn materialized_columns_are_orthonormal_in_the_space_time_norm() {
        let (blocks, basis) = tiny_basis();
        let pi = basis.materialize();
        let steps = basis.n_steps();
        let (n_u, n_p, n_l) = (blocks.n_u, blocks.n_p, blocks.n_lambda);
        let xu = blocks.x_u.to_dense();
        let xp = blocks.x_p.to_dense();
        let rows = (n_u + n_p + n_l) * steps;
        let mut xst = DMat::zeros(rows, rows);
        for j in 0..steps {
            for a in 0..n_u {
                for b in 0..n_u {
                    xst[(j * n_u + a, j * n_u + b)] = xu[(a, b)];
                }
            }
            let p0 = n_u * steps;
            for a in 0..n_p {
                for b in 0..n_p {
                    xst[(p0 + j * n_p + a, p0 + j * n_p + b)] = xp[(a, b)];
                }
            }
            let l0 = (n_u + n_p) * steps;
            for a in 0..n_l {
                xst[(l0 + j * n_l + a, l0 + j * n_l + a)] = 1.0;
            }
        }
        let gram = pi.transpose() * xst * &pi;
        let n = basis.total();
        assert!(n > 4, "fixture should retain several modes, got {n}");
        let dev = (gram - DMat::identity(n, n)).amax();
        assert!(dev < 1e-9, "space-time gram deviates from identity by {dev:e}");
    }

    #[test]
    fn reduced_euclidean_norm_matches_the_space_time_norm() {
        let (blocks, basis) = tiny_basis();
        let mut rng = StdRng::seed_from_u64(31);
        for _ in 0..5 {
            let mut full = DVec::zeros(basis.total());
            for i in basis.velocity_range() {
                full[i] = rng.gen_range(-1.0..1.0);
            }
            let coeff_norm = full.norm();
            let fields = basis.reconstruct(&full).unwrap();
            let st_norm = trajectory_norm(&blocks.x_u, &fields.velocity);
            assert_relative_eq!(st_norm, coeff_norm, max_relative = 1e-10);
        }
    }

    #[test]
    fn reconstruction_agrees_with_the_materialized_basis() {
        let (blocks, basis) = tiny_basis();
        let pi = basis.materialize();
        let mut rng = StdRng::seed_from_u64(57);
        let w = DVec::from_fn(basis.total(), |_, _| rng.gen_range(-1.0..1.0));
        let full = &pi * &w;
        let fields = basis.reconstruct(&w).unwrap();
        let steps = basis.n_steps();
        let (n_u, n_p, n_l) = (blocks.n_u, blocks.n_p, blocks.n_lambda);
        for j in 0..steps {
            for a in 0..n_u {
                assert_relative_eq!(full[j * n_u + a], fields.velocity[(a, j)], epsilon = 1e-12);
            }
            for a in 0..n_p {
                assert_relative_eq!(
                    full[n_u * steps + j * n_p + a],
                    fields.pressure[(a, j)],
                    epsilon = 1e-12
                );
            }
            for a in 0..n_l {
                assert_relative_eq!(
                    full[(n_u + n_p) * steps + j * n_l + a],
                    fields.multiplier[(a, j)],
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn directory_round_trip_preserves_the_basis() {
        let (_, basis) = tiny_basis();
        let dir = tempfile::tempdir().unwrap();
        basis.save(dir.path()).unwrap();
        let loaded = SpaceTimeBasis::load(dir.path()).unwrap();
        assert_eq!(basis.velocity_space.phi, loaded.velocity_space.phi);
        assert_eq!(basis.velocity_time.psi, loaded.velocity_time.psi);
        assert_eq!(basis.pressure_space.phi, loaded.pressure_space.phi);
        assert_eq!(basis.pressure_time.psi, loaded.pressure_time.psi);
        assert_eq!(basis.multiplier_dims, loaded.multiplier_dims);
        assert_eq!(basis.multiplier_time.len(), loaded.multiplier_time.len());
        assert_eq!(basis.multiplier_time[0].psi, loaded.multiplier_time[0].psi);
        assert_eq!(basis.velocity_space.norm, loaded.velocity_space.norm);
        assert_eq!(basis.velocity_space.truncation, loaded.velocity_space.truncation);
        assert_eq!(basis.velocity_space.sigma, loaded.velocity_space.sigma);
        assert_eq!(basis.pressure_time.spectrum, loaded.pressure_time.spectrum);
    }

    #[test]
    fn assembly_rejects_inconsistent_pieces() {
        let (vs, vt, ps, pt, mt) = unit_bases();
        let empty = SpaceBasis {
            phi: DMat::zeros(3, 0),
            norm: NormTag::Velocity,
            sigma: DVec::zeros(0),
            spectrum: DVec::zeros(0),
            truncation: Truncation::Rank(0),
        };
        let err = assemble_space_time_basis(
            (empty, vt.clone()),
            (ps.clone(), pt.clone()),
            vec![1],
            vec![mt.clone()],
        );
        assert!(matches!(err, Err(PodError::EmptyBasis { part: "velocity space" })));

        let short = TimeBasis {
            psi: DMat::from_column_slice(3, 1, &[1.0, 0.0, 0.0]),
            sigma: DVec::from_element(1, 1.0),
            spectrum: DVec::from_element(1, 1.0),
            truncation: Truncation::Rank(1),
        };
        let err = assemble_space_time_basis(
            (vs.clone(), vt.clone()),
            (ps.clone(), short),
            vec![1],
            vec![mt.clone()],
        );
        assert!(matches!(err, Err(PodError::StepMismatch { expected: 2, found: 3 })));

        let err = assemble_space_time_basis((vs, vt), (ps, pt), vec![1, 2], vec![mt]);
        assert!(matches!(err, Err(PodError::MultiplierCount { dims: 2, bases: 1 })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn flat_index_is_bijective(n_s in 1usize..8, n_t in 1usize..8) {
            let mut seen = vec![false; n_s * n_t];
            for i in 0..n_s {
                for j in 0..n_t {
                    let f = SpaceTimeBasis::flat_index(i, j, n_t);
                    prop_assert!(f < n_s * n_t);
                    prop_assert!(!seen[f]);
                    seen[f] = true;
                }
            }
            prop_assert!(seen.iter().all(|&s| s));
        }
    }
}
