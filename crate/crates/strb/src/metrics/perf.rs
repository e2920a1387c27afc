//! Size and wall-clock accounting. The reduction factor is exact integer
//! arithmetic; speedups are ratios of mean wall times whose individual
//! measurements should each be the median of repeated runs on the
//! monotonic clock — `median_seconds` packages that protocol.

use super::{Method, MetricsError, Result};
use std::time::Instant;

/// Sizes and wall times of one method at one tolerance. The `fom_seconds`
/// and `online_seconds` fields are means over the test set of per-query
/// measurements; `speedup` is their ratio.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerfReport {
    pub method: Method,
    pub eps_pod: f64,
    /// Space-time unknowns of the full model.
    pub full_dofs: usize,
    /// Space-time unknowns of the reduced model.
    pub reduced_dofs: usize,
    pub reduction_factor: f64,
    /// One-off assembly wall time; zero is legitimate when every stage was
    /// a cache hit.
    pub offline_seconds: f64,
    pub fom_seconds: f64,
    pub online_seconds: f64,
    pub speedup: f64,
}

/// Builds the accounting row from per-query wall times.
pub fn perf_report(
    method: Method,
    eps_pod: f64,
    full_dofs: usize,
    reduced_dofs: usize,
    offline_seconds: f64,
    fom_seconds: &[f64],
    online_seconds: &[f64],
) -> Result<PerfReport> {
    if !(eps_pod.is_finite() && eps_pod > 0.0) {
        return Err(MetricsError::BadTolerance { value: eps_pod });
    }
    if full_dofs == 0 || reduced_dofs == 0 {
        return Err(MetricsError::ZeroDofs);
    }
    if !(offline_seconds.is_finite() && offline_seconds >= 0.0) {
        return Err(MetricsError::BadTiming { value: offline_seconds });
    }
    if fom_seconds.is_empty() || online_seconds.is_empty() {
        return Err(MetricsError::Empty { what: "the wall-clock sample set" });
    }
    for &t in fom_seconds.iter().chain(online_seconds) {
        if !(t.is_finite() && t > 0.0) {
            return Err(MetricsError::BadTiming { value: t });
        }
    }
    let mean = |ts: &[f64]| ts.iter().sum::<f64>() / ts.len() as f64;
    let fom = mean(fom_seconds);
    let online = mean(online_seconds);
    Ok(PerfReport {
        method,
        eps_pod,
        full_dofs,
        reduced_dofs,
        reduction_factor: full_dofs as f64 / reduced_dofs as f64,
        offline_seconds,
        fom_seconds: fom,
        online_seconds: online,
        speedup: fom / online,
    })
}

/// Median of a nonempty, finite sample; the even case averages the two
/// central values.
pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(MetricsError::Empty { what: "the sample set" });
    }
    for &s in samples {
        if !s.is_finite() {
            return Err(MetricsError::BadTiming { value: s });
        }
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mid = sorted.len() / 2;
    Ok(if sorted.len() % 2 == 1 { sorted[mid] } else { (sorted[mid - 1] + sorted[mid]) / 2.0 })
}

/// Wall time of `f` on the monotonic clock: the median over `reps` runs,
/// never fewer than five — single measurements of millisecond solves are
/// too noisy to divide.
pub fn median_seconds<F: FnMut()>(reps: usize, mut f: F) -> f64 {
    let reps = reps.max(5);
    let mut samples = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        f();
        samples.push(start.elapsed().as_secs_f64());
    }
    // Nonempty by construction and the clock is finite.
    median(&samples).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_factor_is_exact_arithmetic() {
        let report =
            perf_report(Method::StGrb, 1e-4, 1000, 8, 0.5, &[2.0], &[1.0]).unwrap();
        assert_eq!(report.reduction_factor, 125.0);
        // Any reduction that actually truncated leaves at least a factor
        // of one.
        for (full, reduced) in [(10, 10), (10, 3), (7340, 319), (2, 1)] {
            let r = perf_report(Method::StGrb, 1e-4, full, reduced, 0.0, &[1.0], &[1.0]).unwrap();
            assert!(r.reduction_factor >= 1.0);
        }
    }

    #[test]
    fn speedup_divides_the_mean_walls() {
        let report = perf_report(
            Method::StPgrb,
            1e-3,
            100,
            10,
            1.5,
            &[2.0, 4.0],
            &[1.0, 1.0],
        )
        .unwrap();
        assert_eq!(report.fom_seconds, 3.0);
        assert_eq!(report.online_seconds, 1.0);
        assert_eq!(report.speedup, 3.0);
        assert_eq!(report.offline_seconds, 1.5);
    }

    #[test]
    fn degenerate_accounting_inputs_are_refused() {
        assert!(matches!(
            perf_report(Method::StGrb, 1e-4, 0, 5, 0.0, &[1.0], &[1.0]),
            Err(MetricsError::ZeroDofs)
        ));
        assert!(matches!(
            perf_report(Method::StGrb, 1e-4, 10, 0, 0.0, &[1.0], &[1.0]),
            Err(MetricsError::ZeroDofs)
        ));
        assert!(matches!(
            perf_report(Method::StGrb, 1e-4, 10, 5, 0.0, &[], &[1.0]),
            Err(MetricsError::Empty { .. })
        ));
        assert!(matches!(
            perf_report(Method::StGrb, 1e-4, 10, 5, 0.0, &[1.0], &[0.0]),
            Err(MetricsError::BadTiming { .. })
        ));
        assert!(matches!(
            perf_report(Method::StGrb, 1e-4, 10, 5, f64::NAN, &[1.0], &[1.0]),
            Err(MetricsError::BadTiming { .. })
        ));
        assert!(matches!(
            perf_report(Method::StGrb, -1.0, 10, 5, 0.0, &[1.0], &[1.0]),
            Err(MetricsError::BadTolerance { .. })
        ));
    }

    #[test]
    fn median_handles_both_parities() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
        assert_eq!(median(&[7.0]).unwrap(), 7.0);
        assert!(matches!(median(&[]), Err(MetricsError::Empty { .. })));
        assert!(matches!(median(&[1.0, f64::NAN]), Err(MetricsError::BadTiming { .. })));
    }

    #[test]
    fn median_seconds_repeats_at_least_five_times() {
        let mut count = 0usize;
        let t = median_seconds(1, || count += 1);
        assert_eq!(count, 5);
        assert!(t.is_finite() && t >= 0.0);
        let mut count = 0usize;
        median_seconds(9, || count += 1);
        assert_eq!(count, 9);
    }
}
