//! Shifted Gramians of time bases.
//!
//! Multistep time discretizations couple a test mode at step `n` with trial
//! modes at steps `n-1`, `n-2`; after projection onto time bases those
//! couplings become Gramians of row-shifted basis blocks. The general form
//! pairs two (possibly different) bases and limits the summation window,
//! because products of two already-shifted factors run over fewer steps than
//! the natural range of either shift alone.

use super::{Result, TensorError};
use crate::DMat;

/// `G[i, j] = sum_{k=0}^{len-1} a[k + s1, i] * b[k + s2, j]`.
///
/// `a` and `b` must have the same number of rows (time steps), and the window
/// must satisfy `len + max(s1, s2) <= rows`. Misuse is a caller bug, so these
/// are asserted rather than surfaced as errors.
pub fn cross_shifted_gramian(a: &DMat, b: &DMat, s1: usize, s2: usize, len: usize) -> DMat {
    assert_eq!(a.nrows(), b.nrows(), "time bases must share the step count");
    assert!(
        len + s1.max(s2) <= a.nrows(),
        "window {len} with shifts ({s1},{s2}) exceeds {} steps",
        a.nrows()
    );
    if len == 0 {
        return DMat::zeros(a.ncols(), b.ncols());
    }
    a.rows(s1, len).transpose() * b.rows(s2, len)
}

/// Single-basis shifted Gramian over the natural window:
/// `G[i, j] = sum_k psi[k + s1, i] * psi[k + s2, j]` for every `k` keeping
/// both indices in range.
pub fn shifted_gramian(psi: &DMat, s1: usize, s2: usize) -> Result<DMat> {
    let rows = psi.nrows();
    for s in [s1, s2] {
        if s >= rows {
            return Err(TensorError::ShiftOutOfRange { shift: s, rows });
        }
    }
    Ok(cross_shifted_gramian(psi, psi, s1, s2, rows - s1.max(s2)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    /// Explicit index-loop oracle.
    fn oracle(a: &DMat, b: &DMat, s1: usize, s2: usize, len: usize) -> DMat {
        let mut g = DMat::zeros(a.ncols(), b.ncols());
        for i in 0..a.ncols() {
            for j in 0..b.ncols() {
                let mut acc = 0.0;
                for k in 0..len {
                    acc += a[(k + s1, i)] * b[(k + s2, j)];
                }
                g[(i, j)] = acc;
            }
        }
        g
    }

    #[test]
    fn zero_shift_on_orthonormal_basis_is_identity() {
        // QR of a random matrix gives orthonormal columns.
        let mut rng = StdRng::seed_from_u64(5);
        let a = DMat::from_fn(10, 4, |_, _| rng.gen_range(-1.0..1.0));
        let q = a.qr().q();
        let g = shifted_gramian(&q, 0, 0).unwrap();
        assert_relative_eq!(g, DMat::identity(4, 4), epsilon = 1e-13);
    }

    #[test]
    fn unit_shift_on_identity_is_the_subdiagonal_shift() {
        let n = 6;
        let psi = DMat::identity(n, n);
        let g = shifted_gramian(&psi, 1, 0).unwrap();
        // G[i, j] = sum_k e_i(k+1) e_j(k) = 1 iff i = j + 1.
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j + 1 { 1.0 } else { 0.0 };
                assert_eq!(g[(i, j)], expected, "at ({i},{j})");
            }
        }
    }

    #[test]
    fn shift_2_0_matches_loop_oracle_on_random_10x3() {
        let mut rng = StdRng::seed_from_u64(42);
        let psi = DMat::from_fn(10, 3, |_, _| rng.gen_range(-1.0..1.0));
        let g = shifted_gramian(&psi, 2, 0).unwrap();
        assert_relative_eq!(g, oracle(&psi, &psi, 2, 0, 8), epsilon = 1e-14);
    }

    #[test]
    fn out_of_range_shift_is_an_error() {
        let psi = DMat::zeros(4, 2);
        assert!(matches!(
            shifted_gramian(&psi, 4, 0),
            Err(TensorError::ShiftOutOfRange { shift: 4, rows: 4 })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(120))]

        #[test]
        fn matches_loop_oracle(
            seed in 0u64..10_000,
            rows in 3usize..12,
            ca in 1usize..5,
            cb in 1usize..5,
            s1 in 0usize..3,
            s2 in 0usize..3,
        ) {
            prop_assume!(s1 < rows && s2 < rows);
            let mut rng = StdRng::seed_from_u64(seed);
            let a = DMat::from_fn(rows, ca, |_, _| rng.gen_range(-1.0..1.0));
            let b = DMat::from_fn(rows, cb, |_, _| rng.gen_range(-1.0..1.0));
            let natural = rows - s1.max(s2);
            for len in [0, natural / 2, natural] {
                let g = cross_shifted_gramian(&a, &b, s1, s2, len);
                let o = oracle(&a, &b, s1, s2, len);
                prop_assert!((g - o).abs().max() <= 1e-13);
            }
            let g = shifted_gramian(&a, s1, s2).unwrap();
            let o = oracle(&a, &a, s1, s2, natural);
            prop_assert!((g - o).abs().max() <= 1e-13);
        }
    }
}
