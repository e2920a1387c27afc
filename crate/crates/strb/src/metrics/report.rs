//! Study tables: one row per method and tolerance, with the normalized
//! error columns that make runs at different tolerances comparable. Three
//! emitters cover the uses — the full CSV/JSON pair for reading, a
//! clock-free pair for bitwise reproducibility checks, and a long-format
//! CSV of per-sample errors for external plotting tools.

use super::{ErrorReport, MetricsError, Method, PerfReport, Result};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// One summary line of a study: sizes, reduction factor, wall-clock
/// accounting, and test-set errors both raw and divided by the tolerance
/// that produced the bases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRow {
    pub method: Method,
    pub eps_pod: f64,
    pub eps_t: Option<f64>,
    pub full_dofs: usize,
    pub reduced_dofs: usize,
    pub reduction_factor: f64,
    pub speedup: f64,
    pub offline_seconds: f64,
    pub fom_seconds: f64,
    pub online_seconds: f64,
    pub e_u: f64,
    pub e_p: f64,
    pub e_u_normalized: f64,
    pub e_p_normalized: f64,
}

/// Joins accuracy and accounting reports into table rows, one per run. The
/// two reports of a pair must describe the same run.
pub fn study_report(runs: &[(ErrorReport, PerfReport)]) -> Result<Vec<StudyRow>> {
    runs.iter()
        .map(|(errors, perf)| {
            if errors.method != perf.method || errors.eps_pod != perf.eps_pod {
                return Err(MetricsError::Mismatch {
                    context: format!(
                        "accuracy report for {} at {:e}, accounting for {} at {:e}",
                        errors.method, errors.eps_pod, perf.method, perf.eps_pod
                    ),
                });
            }
            Ok(StudyRow {
                method: errors.method,
                eps_pod: errors.eps_pod,
                eps_t: errors.eps_t,
                full_dofs: perf.full_dofs,
                reduced_dofs: perf.reduced_dofs,
                reduction_factor: perf.reduction_factor,
                speedup: perf.speedup,
                offline_seconds: perf.offline_seconds,
                fom_seconds: perf.fom_seconds,
                online_seconds: perf.online_seconds,
                e_u: errors.e_u,
                e_p: errors.e_p,
                e_u_normalized: errors.e_u / errors.eps_pod,
                e_p_normalized: errors.e_p / errors.eps_pod,
            })
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|t| t.to_string()).unwrap_or_default()
}

/// Full table, clocks included.
pub fn write_study_csv<W: Write>(rows: &[StudyRow], w: &mut W) -> Result<()> {
    writeln!(
        w,
        "method,eps_pod,eps_t,full_dofs,reduced_dofs,reduction_factor,speedup,\
         offline_seconds,fom_seconds,online_seconds,e_u,e_p,e_u_over_eps,e_p_over_eps"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.eps_pod,
            opt(r.eps_t),
            r.full_dofs,
            r.reduced_dofs,
            r.reduction_factor,
            r.speedup,
            r.offline_seconds,
            r.fom_seconds,
            r.online_seconds,
            r.e_u,
            r.e_p,
            r.e_u_normalized,
            r.e_p_normalized
        )?;
    }
    Ok(())
}

pub fn write_study_json<W: Write>(rows: &[StudyRow], w: &mut W) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, rows)?;
    writeln!(w)?;
    Ok(())
}

/// The clock-free columns of a row — everything in here is reproduced to
/// the byte by a rerun with the same configuration and seed.
#[derive(Serialize)]
struct ErrorColumns<'a> {
    method: &'a Method,
    eps_pod: f64,
    eps_t: Option<f64>,
    full_dofs: usize,
    reduced_dofs: usize,
    reduction_factor: f64,
    e_u: f64,
    e_p: f64,
    e_u_normalized: f64,
    e_p_normalized: f64,
}

impl<'a> From<&'a StudyRow> for ErrorColumns<'a> {
    fn from(r: &'a StudyRow) -> Self {
        ErrorColumns {
            method: &r.method,
            eps_pod: r.eps_pod,
            eps_t: r.eps_t,
            full_dofs: r.full_dofs,
            reduced_dofs: r.reduced_dofs,
            reduction_factor: r.reduction_factor,
            e_u: r.e_u,
            e_p: r.e_p,
            e_u_normalized: r.e_u_normalized,
            e_p_normalized: r.e_p_normalized,
        }
    }
}

/// Table without the wall-clock columns. Two runs of the same study with
/// the same seed must produce this file byte for byte.
pub fn write_error_csv<W: Write>(rows: &[StudyRow], w: &mut W) -> Result<()> {
    writeln!(
        w,
        "method,eps_pod,eps_t,full_dofs,reduced_dofs,reduction_factor,e_u,e_p,\
         e_u_over_eps,e_p_over_eps"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            r.method,
            r.eps_pod,
            opt(r.eps_t),
            r.full_dofs,
            r.reduced_dofs,
            r.reduction_factor,
            r.e_u,
            r.e_p,
            r.e_u_normalized,
            r.e_p_normalized
        )?;
    }
    Ok(())
}

pub fn write_error_json<W: Write>(rows: &[StudyRow], w: &mut W) -> Result<()> {
    let projected: Vec<ErrorColumns> = rows.iter().map(ErrorColumns::from).collect();
    serde_json::to_writer_pretty(&mut *w, &projected)?;
    writeln!(w)?;
    Ok(())
}

/// Per-sample errors in long format, one row per (sample, field) — the
/// shape plotting tools group and facet without reshaping.
pub fn write_long_csv<W: Write>(reports: &[ErrorReport], w: &mut W) -> Result<()> {
    writeln!(w, "method,eps_pod,sample,mu0,mu1,mu2,field,relative_error")?;
    for report in reports {
        for (i, s) in report.samples.iter().enumerate() {
            for (field, e) in [("velocity", s.e_u), ("pressure", s.e_p)] {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    report.method, report.eps_pod, i, s.mu.mu0, s.mu.mu1, s.mu.mu2, field, e
                )?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fom::ParameterVector;
    use crate::metrics::SampleError;

    fn sample_reports() -> (ErrorReport, PerfReport) {
        let errors = ErrorReport {
            method: Method::StGrb,
            eps_pod: 1e-4,
            eps_t: Some(0.5),
            e_u: 2e-4,
            e_p: 5e-4,
            samples: vec![
                SampleError { mu: ParameterVector::new(5.0, 0.2, 0.5), e_u: 1e-4, e_p: 4e-4 },
                SampleError { mu: ParameterVector::new(6.0, 0.1, 0.3), e_u: 3e-4, e_p: 6e-4 },
            ],
        };
        let perf = PerfReport {
            method: Method::StGrb,
            eps_pod: 1e-4,
            full_dofs: 7140,
            reduced_dofs: 316,
            reduction_factor: 7140.0 / 316.0,
            offline_seconds: 0.2,
            fom_seconds: 6.5e-3,
            online_seconds: 1.2e-3,
            speedup: 6.5 / 1.2,
        };
        (errors, perf)
    }

    #[test]
    fn rows_join_reports_and_normalize_by_the_tolerance() {
        let (errors, perf) = sample_reports();
        let rows = study_report(&[(errors.clone(), perf.clone())]).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!(r.method, Method::StGrb);
        assert_eq!(r.e_u_normalized, 2e-4 / 1e-4);
        assert_eq!(r.e_p_normalized, 5e-4 / 1e-4);
        assert_eq!(r.reduced_dofs, 316);
        assert_eq!(r.speedup, perf.speedup);

        let mut other = perf;
        other.method = Method::StPgrb;
        assert!(matches!(
            study_report(&[(errors, other)]),
            Err(MetricsError::Mismatch { .. })
        ));
    }

    #[test]
    fn empty_study_emits_only_the_header() {
        assert_eq!(study_report(&[]).unwrap(), vec![]);
        let mut csv = Vec::new();
        write_study_csv(&[], &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1);
        assert!(text.starts_with("method,eps_pod,"));
        let mut long = Vec::new();
        write_long_csv(&[], &mut long).unwrap();
        assert_eq!(String::from_utf8(long).unwrap().lines().count(), 1);
    }

    #[test]
    fn full_table_round_trips_through_json() {
        let (errors, perf) = sample_reports();
        let rows = study_report(&[(errors, perf)]).unwrap();
        let mut json = Vec::new();
        write_study_json(&rows, &mut json).unwrap();
        let back: Vec<StudyRow> = serde_json::from_slice(&json).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn error_table_omits_every_clock_column() {
        let (errors, perf) = sample_reports();
        let rows = study_report(&[(errors, perf)]).unwrap();
        let mut csv = Vec::new();
        write_error_csv(&rows, &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 2);
        for clock in ["speedup", "seconds"] {
            assert!(!text.contains(clock), "error table leaked column {clock}");
        }
        let mut json = Vec::new();
        write_error_json(&rows, &mut json).unwrap();
        let text = String::from_utf8(json.clone()).unwrap();
        for clock in ["speedup", "seconds"] {
            assert!(!text.contains(clock), "error json leaked field {clock}");
        }
        // Identical rows serialize to identical bytes.
        let mut again = Vec::new();
        let (errors, perf) = sample_reports();
        let rows2 = study_report(&[(errors, perf)]).unwrap();
        write_error_json(&rows2, &mut again).unwrap();
        assert_eq!(json, again);
    }

    #[test]
    fn long_format_emits_one_row_per_sample_and_field() {
        let (errors, _) = sample_reports();
        let mut csv = Vec::new();
        write_long_csv(&[errors.clone()], &mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * errors.samples.len());
        assert!(text.contains("velocity"));
        assert!(text.contains("pressure"));
        assert!(text.contains("stgrb,0.0001,0,5,0.2,0.5,velocity,0.0001"));
    }
}
