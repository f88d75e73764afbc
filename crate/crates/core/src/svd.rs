//! Singular values of small dense complex matrices by one-sided (Hestenes)
//! Jacobi rotations.
//!
//! The rank matrices are tall (`h0 x 2^g`, at most a few hundred rows and 16
//! or 32 columns), which is the regime where column-orthogonalising Jacobi is
//! both cheap and accurate: small singular values come out with relative
//! accuracy rather than accuracy relative to the largest one.

use num_complex::Complex;
use num_traits::Float;

const MAX_SWEEPS: usize = 80;

/// Singular values of the `rows x cols` column-major matrix `columns`
/// (`columns[j]` is column `j`), sorted descending. Returns exactly `cols`
/// values; when `rows < cols` the trailing ones are zero up to roundoff.
pub fn singular_values<T: Float>(mut columns: Vec<Vec<Complex<T>>>) -> Vec<T> {
    let n = columns.len();
    if n == 0 {
        return Vec::new();
    }
    let m = columns[0].len();
    assert!(columns.iter().all(|c| c.len() == m), "ragged matrix");
    let eps = T::epsilon();
    let threshold = eps * T::from(m.max(1)).unwrap().sqrt();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (&columns[p], &columns[q]);
                    let mut alpha = T::zero();
                    let mut beta = T::zero();
                    let mut gamma = Complex::new(T::zero(), T::zero());
                    for i in 0..m {
                        alpha = alpha + cp[i].norm_sqr();
                        beta = beta + cq[i].norm_sqr();
                        gamma = gamma + cp[i].conj() * cq[i];
                    }
                    (alpha, beta, gamma)
                };
                let g_abs = gamma.norm();
                if g_abs == T::zero() || g_abs <= threshold * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // Rotate (a_p, a_q e^{-i phi}) by a real Givens pair.
                let phase = gamma / g_abs;
                let two = T::one() + T::one();
                let zeta = (beta - alpha) / (two * g_abs);
                let sign = if zeta >= T::zero() { T::one() } else { -T::one() };
                let t = sign / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let cos = T::one() / (T::one() + t * t).sqrt();
                let sin = cos * t;
                let (left, right) = columns.split_at_mut(q);
                let cp = &mut left[p];
                let cq = &mut right[0];
                for i in 0..m {
                    let ap = cp[i];
                    let aq = cq[i] * phase.conj();
                    cp[i] = ap * cos - aq * sin;
                    cq[i] = ap * sin + aq * cos;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut sigma: Vec<T> = columns
        .iter()
        .map(|c| c.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt())
        .collect();
    sigma.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sigma
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn to_columns(m: &DMatrix<Complex64>) -> Vec<Vec<Complex64>> {
        (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect()
    }

    #[test]
    fn diagonal_matrix() {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(0.0, 3.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(2.0, 0.0),
        ]));
        let s = singular_values(to_columns(&m));
        assert_eq!(s.len(), 3);
        for (got, want) in s.iter().zip([3.0, 2.0, 1.0]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_matrix_pads_with_zeros() {
        let m = DMatrix::from_row_slice(1, 3, &[Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0), Complex64::new(0.0, 0.0)]);
        let s = singular_values(to_columns(&m));
        assert!((s[0] - 5.0).abs() < 1e-14);
        assert!(s[1] < 1e-14 && s[2] < 1e-14);
    }

    proptest! {
        // Cross-check against nalgebra's bidiagonal QR SVD.
        #[test]
        fn agrees_with_nalgebra(
            rows in 1usize..12,
            cols in 1usize..6,
            data in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 72),
        ) {
            let m = DMatrix::from_fn(rows, cols, |i, j| {
                let (re, im) = data[i * 6 + j];
                Complex64::new(re, im)
            });
            let ours = singular_values(to_columns(&m));
            let mut theirs: Vec<f64> = m.clone().singular_values().iter().copied().collect();
            theirs.sort_by(|a, b| b.partial_cmp(a).unwrap());
            theirs.resize(cols, 0.0);
            for (a, b) in ours.iter().zip(&theirs) {
                prop_assert!((a - b).abs() < 1e-12, "{:?} vs {:?}", ours, theirs);
            }
        }
    }
}
