//! Evaluation of reduced solutions against full-order truth: relative
//! space-time energy errors, wall-clock and size accounting, and the study
//! tables that summarize a sweep.
//!
//! Errors are relative field-energy norms averaged over a test set. The
//! space-time energy of a trajectory block is the per-step sum of spatial
//! quadratic forms, so it is computed blockwise against the sparse spatial
//! norm matrices — the space-time Gram matrix never exists in memory. Wall
//! times come from the monotonic clock, each measurement the median of at
//! least five repetitions; they are kept in separate report columns from
//! the numerical quantities, because two runs of the same study agree to
//! the byte on sizes and errors but never on clocks. The emitters split
//! accordingly: the full table carries everything, the error table omits
//! the clock columns and is the file a reproducibility check may compare
//! bitwise.

mod perf;
mod report;

pub use perf::{median, median_seconds, perf_report, PerfReport};
pub use report::{
    study_report, write_error_csv, write_error_json, write_long_csv, write_study_csv,
    write_study_json, StudyRow,
};

use crate::fom::{FomSpatialBlocks, ParameterVector};
use crate::pod::trajectory_norm;
use crate::DMat;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("evaluation inputs differ: {context}")]
    Mismatch { context: String },
    #[error("reference trajectory of sample {sample} has a zero {field} block; relative errors need a nonzero reference")]
    ZeroReference { field: &'static str, sample: usize },
    #[error("{what} must not be empty")]
    Empty { what: &'static str },
    #[error("tolerance must be finite and positive, got {value:.3e}")]
    BadTolerance { value: f64 },
    #[error("wall-clock sample must be finite and positive, got {value:.3e}")]
    BadTiming { value: f64 },
    #[error("degree-of-freedom counts must be positive")]
    ZeroDofs,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("report serialization failed: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

/// The three reduced solution strategies, under the names their solver
/// entry points carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "srbtfo")]
    SrbTfo,
    #[serde(rename = "stgrb")]
    StGrb,
    #[serde(rename = "stpgrb")]
    StPgrb,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::SrbTfo, Method::StGrb, Method::StPgrb];

    pub fn label(&self) -> &'static str {
        match self {
            Method::SrbTfo => "srbtfo",
            Method::StGrb => "stgrb",
            Method::StPgrb => "stpgrb",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = MetricsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "srbtfo" => Ok(Method::SrbTfo),
            "stgrb" => Ok(Method::StGrb),
            "stpgrb" => Ok(Method::StPgrb),
            other => Err(MetricsError::Mismatch {
                context: format!("unknown method {other:?}; expected srbtfo, stgrb, or stpgrb"),
            }),
        }
    }
}

/// Relative errors of one reduced trajectory against its reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleError {
    pub mu: ParameterVector,
    pub e_u: f64,
    pub e_p: f64,
}

/// Test-set accuracy of one reduced method at one tolerance: the averaged
/// relative field errors plus the per-sample breakdown behind the average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub method: Method,
    pub eps_pod: f64,
    pub eps_t: Option<f64>,
    /// Mean over the test set of the relative velocity-energy errors.
    pub e_u: f64,
    /// Mean over the test set of the relative pressure-energy errors.
    pub e_p: f64,
    pub samples: Vec<SampleError>,
}

/// Compares reduced trajectories against references sample by sample. Both
/// trajectories of a pair are stacked monolithic states, one column per
/// step; the velocity and pressure blocks are measured in their spatial
/// energy norms summed over steps, each relative to the reference's own
/// energy, and the report averages over the set.
pub fn relative_errors(
    method: Method,
    eps_pod: f64,
    eps_t: Option<f64>,
    roms: &[DMat],
    foms: &[DMat],
    mus: &[ParameterVector],
    blocks: &FomSpatialBlocks,
) -> Result<ErrorReport> {
    if !(eps_pod.is_finite() && eps_pod > 0.0) {
        return Err(MetricsError::BadTolerance { value: eps_pod });
    }
    if let Some(t) = eps_t {
        if !(t.is_finite() && t > 0.0) {
            return Err(MetricsError::BadTolerance { value: t });
        }
    }
    if roms.is_empty() {
        return Err(MetricsError::Empty { what: "the evaluation set" });
    }
    if roms.len() != foms.len() || roms.len() != mus.len() {
        return Err(MetricsError::Mismatch {
            context: format!(
                "{} reduced trajectories, {} references, {} parameters",
                roms.len(),
                foms.len(),
                mus.len()
            ),
        });
    }
    let rows = blocks.multiplier_range().end;
    let mut samples = Vec::with_capacity(roms.len());
    for (i, ((rom, fom), mu)) in roms.iter().zip(foms).zip(mus).enumerate() {
        if rom.shape() != fom.shape() || rom.nrows() != rows || rom.ncols() == 0 {
            return Err(MetricsError::Mismatch {
                context: format!(
                    "sample {i}: reduced {:?} vs reference {:?}, model rows {rows}",
                    rom.shape(),
                    fom.shape()
                ),
            });
        }
        let p0 = blocks.pressure_range().start;
        let fom_u = fom.rows(0, blocks.n_u).into_owned();
        let fom_p = fom.rows(p0, blocks.n_p).into_owned();
        let ref_u = trajectory_norm(&blocks.x_u, &fom_u);
        if ref_u == 0.0 {
            return Err(MetricsError::ZeroReference { field: "velocity", sample: i });
        }
        let ref_p = trajectory_norm(&blocks.x_p, &fom_p);
        if ref_p == 0.0 {
            return Err(MetricsError::ZeroReference { field: "pressure", sample: i });
        }
        let diff_u = rom.rows(0, blocks.n_u) - &fom_u;
        let diff_p = rom.rows(p0, blocks.n_p) - &fom_p;
        samples.push(SampleError {
            mu: *mu,
            e_u: trajectory_norm(&blocks.x_u, &diff_u) / ref_u,
            e_p: trajectory_norm(&blocks.x_p, &diff_p) / ref_p,
        });
    }
    let n = samples.len() as f64;
    let e_u = samples.iter().map(|s| s.e_u).sum::<f64>() / n;
    let e_p = samples.iter().map(|s| s.e_p).sum::<f64>() / n;
    Ok(ErrorReport { method, eps_pod, eps_t, e_u, e_p, samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testsupport::tiny_training;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_trajectories_have_zero_error() {
        let (blocks, _datum, _grid, mus, trajs) = tiny_training(4, 3, 17);
        let report =
            relative_errors(Method::StGrb, 1e-4, Some(0.5), &trajs, &trajs, &mus, &blocks)
                .unwrap();
        assert_eq!(report.e_u, 0.0);
        assert_eq!(report.e_p, 0.0);
        assert!(report.samples.iter().all(|s| s.e_u == 0.0 && s.e_p == 0.0));
        assert_eq!(report.samples.len(), 3);
    }

    #[test]
    fn doubled_trajectory_has_unit_error() {
        // rom = 2 fom makes rom - fom = fom, so both relative errors are
        // exactly one by homogeneity of the norm.
        let (blocks, _datum, _grid, mus, trajs) = tiny_training(4, 2, 17);
        let doubled: Vec<DMat> = trajs.iter().map(|t| 2.0 * t).collect();
        let report =
            relative_errors(Method::SrbTfo, 1e-3, None, &doubled, &trajs, &mus, &blocks).unwrap();
        for s in &report.samples {
            assert_relative_eq!(s.e_u, 1.0, epsilon = 1e-14);
            assert_relative_eq!(s.e_p, 1.0, epsilon = 1e-14);
        }
        assert_relative_eq!(report.e_u, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn weighted_error_matches_the_materialized_space_time_oracle() {
        // The blockwise per-step sums must equal quadratic forms under the
        // dense Kronecker norm matrix assembled outright.
        let (blocks, _datum, grid, mus, trajs) = tiny_training(4, 2, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let roms: Vec<DMat> = trajs
            .iter()
            .map(|t| t + DMat::from_fn(t.nrows(), t.ncols(), |_, _| rng.gen_range(-0.1..0.1)))
            .collect();
        let report =
            relative_errors(Method::StPgrb, 1e-4, None, &roms, &trajs, &mus, &blocks).unwrap();

        let st_energy = |x: &DMat, block: &DMat| -> f64 {
            // kron(I, X) quadratic form on the step-major vectorization.
            let (n, nt) = block.shape();
            let mut v = crate::DVec::zeros(n * nt);
            for j in 0..nt {
                for a in 0..n {
                    v[j * n + a] = block[(a, j)];
                }
            }
            let mut big = DMat::zeros(n * nt, n * nt);
            for j in 0..nt {
                big.view_mut((j * n, j * n), (n, n)).copy_from(x);
            }
            v.dot(&(&big * &v))
        };
        let xu = blocks.x_u.to_dense();
        let xp = blocks.x_p.to_dense();
        let p0 = blocks.pressure_range().start;
        assert_eq!(trajs[0].ncols(), grid.n_t);
        for (i, s) in report.samples.iter().enumerate() {
            let du = (roms[i].rows(0, blocks.n_u) - trajs[i].rows(0, blocks.n_u)).into_owned();
            let dp =
                (roms[i].rows(p0, blocks.n_p) - trajs[i].rows(p0, blocks.n_p)).into_owned();
            let fu = trajs[i].rows(0, blocks.n_u).into_owned();
            let fp = trajs[i].rows(p0, blocks.n_p).into_owned();
            let oracle_u = (st_energy(&xu, &du) / st_energy(&xu, &fu)).sqrt();
            let oracle_p = (st_energy(&xp, &dp) / st_energy(&xp, &fp)).sqrt();
            assert_relative_eq!(s.e_u, oracle_u, max_relative = 1e-12);
            assert_relative_eq!(s.e_p, oracle_p, max_relative = 1e-12);
        }
    }

    #[test]
    fn temporal_reordering_leaves_errors_unchanged() {
        // The space-time energy is a sum over steps, so any permutation
        // applied to both trajectories at once changes nothing.
        let (blocks, _datum, grid, mus, trajs) = tiny_training(5, 1, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let rom = &trajs[0]
            + DMat::from_fn(trajs[0].nrows(), trajs[0].ncols(), |_, _| rng.gen_range(-0.1..0.1));
        let base = relative_errors(
            Method::StGrb,
            1e-4,
            None,
            std::slice::from_ref(&rom),
            &trajs,
            &mus,
            &blocks,
        )
        .unwrap();
        let perm: Vec<usize> = (0..grid.n_t).rev().collect();
        let shuffle = |m: &DMat| -> DMat {
            DMat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, perm[j])])
        };
        let shuffled = relative_errors(
            Method::StGrb,
            1e-4,
            None,
            &[shuffle(&rom)],
            &[shuffle(&trajs[0])],
            &mus,
            &blocks,
        )
        .unwrap();
        assert_relative_eq!(base.samples[0].e_u, shuffled.samples[0].e_u, max_relative = 1e-12);
        assert_relative_eq!(base.samples[0].e_p, shuffled.samples[0].e_p, max_relative = 1e-12);
    }

    #[test]
    fn report_averages_the_per_sample_errors() {
        let (blocks, _datum, _grid, mus, trajs) = tiny_training(4, 3, 17);
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let roms: Vec<DMat> = trajs
            .iter()
            .map(|t| t + DMat::from_fn(t.nrows(), t.ncols(), |_, _| rng.gen_range(-0.1..0.1)))
            .collect();
        let report =
            relative_errors(Method::StGrb, 1e-4, None, &roms, &trajs, &mus, &blocks).unwrap();
        let n = report.samples.len() as f64;
        assert_eq!(report.e_u, report.samples.iter().map(|s| s.e_u).sum::<f64>() / n);
        assert_eq!(report.e_p, report.samples.iter().map(|s| s.e_p).sum::<f64>() / n);
        assert!(report.e_u > 0.0 && report.e_p > 0.0);
    }

    #[test]
    fn zero_reference_is_refused_by_field_and_sample() {
        let (blocks, _datum, _grid, mus, trajs) = tiny_training(4, 2, 17);
        let mut dead_pressure = trajs.clone();
        let p0 = blocks.pressure_range().start;
        dead_pressure[1].view_mut((p0, 0), (blocks.n_p, 4)).fill(0.0);
        let err = relative_errors(
            Method::StGrb,
            1e-4,
            None,
            &trajs,
            &dead_pressure,
            &mus,
            &blocks,
        )
        .unwrap_err();
        assert!(
            matches!(err, MetricsError::ZeroReference { field: "pressure", sample: 1 }),
            "{err}"
        );
    }

    #[test]
    fn mismatched_inputs_are_refused() {
        let (blocks, _datum, _grid, mus, trajs) = tiny_training(4, 2, 17);
        let empty: [DMat; 0] = [];
        assert!(matches!(
            relative_errors(Method::StGrb, 1e-4, None, &empty, &empty, &[], &blocks),
            Err(MetricsError::Empty { .. })
        ));
        assert!(relative_errors(
            Method::StGrb,
            1e-4,
            None,
            &trajs[..1],
            &trajs,
            &mus,
            &blocks
        )
        .is_err());
        let short: Vec<DMat> = trajs.iter().map(|t| t.columns(0, 3).into_owned()).collect();
        assert!(relative_errors(Method::StGrb, 1e-4, None, &short, &trajs, &mus, &blocks).is_err());
        assert!(matches!(
            relative_errors(Method::StGrb, 0.0, None, &trajs, &trajs, &mus, &blocks),
            Err(MetricsError::BadTolerance { .. })
        ));
        assert!(matches!(
            relative_errors(Method::StGrb, 1e-4, Some(f64::NAN), &trajs, &trajs, &mus, &blocks),
            Err(MetricsError::BadTolerance { .. })
        ));
    }

    #[test]
    fn method_labels_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.label().parse::<Method>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{m}\""));
            assert_eq!(serde_json::from_str::<Method>(&json).unwrap(), m);
        }
        assert!("spectral".parse::<Method>().is_err());
    }
}
