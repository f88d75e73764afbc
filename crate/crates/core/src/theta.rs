//! Siegel theta series, theta with rational characteristics, and theta
//! constants `exp(pi i c^T Z c) * theta(Z, Z c)` with a diagonal-period fast
//! path.
//!
//! Truncation is a cube `||t||_inf <= R` in the summation lattice. The radius
//! is chosen from a Gaussian tail bound (see [`tail_bound`]) so that, for
//! every characteristic reduced into `[-1/2, 1/2)^g`, the discarded part of
//! the series has modulus below the requested tolerance.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::{Complex, Complex64};
use num_rational::Rational64;
use num_traits::{Float, FloatConst};
use rand::Rng;

use crate::error::{Error, Result};
use crate::rational::RationalVector;

/// Default absolute error target for a single theta value.
pub const DEFAULT_SERIES_TOL: f64 = 1e-12;

/// Smallest eigenvalue of `Im Z` accepted for evaluation.
pub const LAMBDA_MIN_FLOOR: f64 = 0.05;

const MAX_RADIUS: u32 = 4096;

/// `Z = X + k Id` with `X` an integer symmetric matrix and `Im k > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitForm {
    pub x: DMatrix<i64>,
    pub k: Complex64,
}

impl SplitForm {
    pub fn has_even_diagonal(&self) -> bool {
        (0..self.x.nrows()).all(|i| self.x[(i, i)] % 2 == 0)
    }
}

/// A point of the Siegel upper half-space.
#[derive(Clone, Debug)]
pub struct PeriodPoint {
    z: DMatrix<Complex64>,
    split: Option<SplitForm>,
    lambda_min: f64,
}

impl PeriodPoint {
    /// Validates symmetry (exact) and positive definiteness of `Im Z`.
    pub fn new(z: DMatrix<Complex64>) -> Result<Self> {
        if !z.is_square() || z.nrows() == 0 {
            return Err(Error::Domain(format!(
                "period matrix must be square and non-empty, got {}x{}",
                z.nrows(),
                z.ncols()
            )));
        }
        let g = z.nrows();
        for row in 0..g {
            for col in (row + 1)..g {
                let residual = (z[(row, col)] - z[(col, row)]).norm();
                if residual != 0.0 {
                    return Err(Error::NotSymmetric { row, col, residual });
                }
            }
        }
        if z.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("period matrix has non-finite entries".into()));
        }
        let lambda_min = smallest_eigenvalue(&z.map(|c| c.im));
        if lambda_min <= 0.0 {
            return Err(Error::NotPositiveDefinite(lambda_min));
        }
        if lambda_min < LAMBDA_MIN_FLOOR {
            return Err(Error::IllConditioned { lambda_min, floor: LAMBDA_MIN_FLOOR });
        }
        Ok(Self { z, split: None, lambda_min })
    }

    /// `Z = X + k Id`; the split is remembered so the fast path can be used.
    pub fn from_split(x: DMatrix<i64>, k: Complex64) -> Result<Self> {
        if !x.is_square() || x.nrows() == 0 {
            return Err(Error::Domain("X must be square and non-empty".into()));
        }
        if x != x.transpose() {
            return Err(Error::Domain("X must be symmetric".into()));
        }
        if k.im.is_nan() || k.im <= 0.0 {
            return Err(Error::Domain(format!("Im k must be positive, got {}", k.im)));
        }
        let g = x.nrows();
        let z = DMatrix::from_fn(g, g, |i, j| {
            let shift = if i == j { k } else { Complex64::new(0.0, 0.0) };
            Complex64::new(x[(i, j)] as f64, 0.0) + shift
        });
        let mut point = Self::new(z)?;
        point.split = Some(SplitForm { x, k });
        Ok(point)
    }

    /// `Z = S + i (A^T A + Id)` with `S` symmetric and `A` arbitrary, all
    /// entries uniform in `[-1, 1]`. Always satisfies `lambda_min >= 1`.
    pub fn random<R: Rng + ?Sized>(g: usize, rng: &mut R) -> Self {
        assert!(g >= 1, "dimension must be positive");
        let mut s = DMatrix::<f64>::zeros(g, g);
        for i in 0..g {
            for j in i..g {
                let value = rng.gen_range(-1.0..=1.0);
                s[(i, j)] = value;
                s[(j, i)] = value;
            }
        }
        let a = DMatrix::<f64>::from_fn(g, g, |_, _| rng.gen_range(-1.0..=1.0));
        let mut y = a.transpose() * &a + DMatrix::<f64>::identity(g, g);
        // Enforce exact symmetry after the floating-point product.
        for i in 0..g {
            for j in (i + 1)..g {
                y[(j, i)] = y[(i, j)];
            }
        }
        let z = DMatrix::from_fn(g, g, |i, j| Complex64::new(s[(i, j)], y[(i, j)]));
        Self::new(z).expect("A^T A + Id is positive definite")
    }

    pub fn g(&self) -> usize {
        self.z.nrows()
    }

    pub fn z(&self) -> &DMatrix<Complex64> {
        &self.z
    }

    pub fn split(&self) -> Option<&SplitForm> {
        self.split.as_ref()
    }

    /// Split form usable by [`theta_null_fast`], if any.
    pub fn fast_split(&self) -> Option<&SplitForm> {
        self.split.as_ref().filter(|s| s.has_even_diagonal())
    }

    pub fn imag(&self) -> DMatrix<f64> {
        self.z.map(|c| c.im)
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// Series budget for this point at absolute tolerance `tol`.
    pub fn budget(&self, tol: f64) -> Result<SeriesBudget> {
        SeriesBudget::new(self.g(), self.lambda_min, tol)
    }

    /// `Z` with `X` added (used to test invariance under even-diagonal shifts).
    pub fn shifted_by(&self, x: &DMatrix<i64>) -> Result<Self> {
        let z = &self.z + x.map(|v| Complex64::new(v as f64, 0.0));
        Self::new(z)
    }
}

fn smallest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Truncation control for one theta value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesBudget {
    pub g: usize,
    pub tol: f64,
    pub radius: u32,
    pub lambda_min: f64,
}

impl SeriesBudget {
    /// Least radius `R >= 1` with `tail_bound(g, lambda_min, R) < tol`.
    pub fn new(g: usize, lambda_min: f64, tol: f64) -> Result<Self> {
        if g == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
        }
        if lambda_min.is_nan() || lambda_min <= 0.0 || !lambda_min.is_finite() {
            return Err(Error::NotPositiveDefinite(lambda_min));
        }
        let radius = (1..=MAX_RADIUS)
            .find(|&r| tail_bound(g, lambda_min, r) < tol)
            .ok_or_else(|| Error::Domain(format!("no radius below {MAX_RADIUS} reaches tol {tol}")))?;
        Ok(Self { g, tol, radius, lambda_min })
    }

    /// Same point, tolerance divided by `factor`.
    pub fn tightened(&self, factor: f64) -> Result<Self> {
        Self::new(self.g, self.lambda_min, self.tol / factor)
    }

    pub fn with_radius(self, radius: u32) -> Self {
        Self { radius, ..self }
    }
}

/// Bound on `sum_{||t||_inf > R} exp(-pi lambda ||t + a||^2)` valid for all
/// shifts with `||a||_inf <= 1/2`:
///
/// ```text
/// g * T(R) * S^(g-1)
/// T(R) = 2 exp(-pi lambda (R + 1/2)^2) / (1 - exp(-2 pi lambda (R + 1)))
/// S    = 1 + 2 exp(-pi lambda / 4) / (1 - exp(-2 pi lambda))
/// ```
///
/// `T(R)` bounds the one-dimensional tail `|n| > R`, `S` bounds a full
/// one-dimensional sum, and the factor `g` counts the coordinate that leaves
/// the cube. Strictly decreasing in `R`.
pub fn tail_bound(g: usize, lambda: f64, radius: u32) -> f64 {
    let r = radius as f64;
    let one_dim_tail = 2.0 * (-PI * lambda * (r + 0.5).powi(2)).exp()
        / (1.0 - (-2.0 * PI * lambda * (r + 1.0)).exp());
    let one_dim_full = 1.0 + 2.0 * (-PI * lambda / 4.0).exp() / (1.0 - (-2.0 * PI * lambda).exp());
    g as f64 * one_dim_tail * one_dim_full.powi(g as i32 - 1)
}

/// Budget for a real symmetric positive definite `Im Z`.
pub fn truncation_radius(im_z: &DMatrix<f64>, tol: f64) -> Result<SeriesBudget> {
    if !im_z.is_square() || im_z.nrows() == 0 {
        return Err(Error::Domain("Im Z must be square and non-empty".into()));
    }
    let lambda_min = smallest_eigenvalue(im_z);
    if lambda_min <= 0.0 {
        return Err(Error::NotPositiveDefinite(lambda_min));
    }
    SeriesBudget::new(im_z.nrows(), lambda_min, tol)
}

/// Series kernels, generic over the real scalar so a wider float type can be
/// dropped in without touching the callers.
pub mod kernel {
    use super::*;

    /// `sum_t exp(pi i (t+s)^T Z (t+s) + 2 pi i (t+s)^T v)` over the box
    /// `ranges[a].0 <= t_a <= ranges[a].1`, `Z` row-major `g x g`.
    pub fn lattice_sum<T: Float + FloatConst>(
        z: &[Complex<T>],
        v: &[Complex<T>],
        shift: &[T],
        ranges: &[(i64, i64)],
    ) -> Complex<T> {
        let g = v.len();
        assert_eq!(z.len(), g * g);
        assert_eq!(shift.len(), g);
        assert_eq!(ranges.len(), g);
        let pi_i = Complex::new(T::zero(), T::PI());
        let two = T::one() + T::one();
        let mut t: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        let mut y = vec![T::zero(); g];
        let mut acc = Complex::new(T::zero(), T::zero());
        loop {
            for a in 0..g {
                y[a] = T::from(t[a]).unwrap() + shift[a];
            }
            let mut quad = Complex::new(T::zero(), T::zero());
            let mut lin = Complex::new(T::zero(), T::zero());
            for a in 0..g {
                let mut row = Complex::new(T::zero(), T::zero());
                for b in 0..g {
                    row = row + z[a * g + b] * y[b];
                }
                quad = quad + row * y[a];
                lin = lin + v[a] * y[a];
            }
            acc = acc + (pi_i * (quad + lin * two)).exp();

            // odometer step over the cube
            let mut a = 0;
            loop {
                if a == g {
                    return acc;
                }
                if t[a] < ranges[a].1 {
                    t[a] += 1;
                    break;
                }
                t[a] = ranges[a].0;
                a += 1;
            }
        }
    }

    /// One-dimensional `sum_{lo <= n <= hi} exp(pi i k n^2 + 2 pi i n v)`.
    pub fn axis_sum<T: Float + FloatConst>(k: Complex<T>, v: Complex<T>, lo: i64, hi: i64) -> Complex<T> {
        let pi_i = Complex::new(T::zero(), T::PI());
        let two = T::one() + T::one();
        let mut acc = Complex::new(T::zero(), T::zero());
        for n in lo..=hi {
            let nf = T::from(n).unwrap();
            acc = acc + (pi_i * (k * (nf * nf) + v * (two * nf))).exp();
        }
        acc
    }

    /// Symmetric cube `[-R, R]^g`.
    pub fn cube(g: usize, radius: u32) -> Vec<(i64, i64)> {
        vec![(-(radius as i64), radius as i64); g]
    }
}

fn row_major(z: &DMatrix<Complex64>) -> Vec<Complex64> {
    let g = z.nrows();
    (0..g * g).map(|idx| z[(idx / g, idx % g)]).collect()
}

/// Truncated `theta(Z, v) = sum_t exp(pi i t^T Z t + 2 pi i t^T v)`.
///
/// With `Im v = Im(Z) a`, the modulus of each term is
/// `exp(pi a^T Y a) * exp(-pi (t+a)^T Y (t+a))`, so the absolute error is at
/// most `budget.tol * exp(pi a^T Y a)` whenever `||a||_inf <= 1/2`.
pub fn siegel_theta(z: &PeriodPoint, v: &[Complex64], budget: &SeriesBudget) -> Complex64 {
    assert_eq!(v.len(), z.g(), "argument length must equal g");
    let zero = vec![0.0; z.g()];
    kernel::lattice_sum(&row_major(z.z()), v, &zero, &kernel::cube(z.g(), budget.radius))
}

/// Summation box for a characteristic reduced into `[-1/2, 1/2)^g`: the cube
/// `[-R, R]` per axis, widened to `R + 1` on axes where the characteristic is
/// exactly `-1/2`. The shifted points `t + c` then fill the closed box
/// `|y_a| <= R + 1/2`, which is symmetric under `c -> -c` and independent of
/// the representative, so the truncated constant is exactly even and
/// `Z^g`-periodic in `c`.
fn characteristic_box(reduced: &RationalVector, radius: u32) -> Vec<(i64, i64)> {
    let minus_half = Rational64::new(-1, 2);
    reduced
        .entries()
        .iter()
        .map(|&x| {
            let r = radius as i64;
            (-r, if x == minus_half { r + 1 } else { r })
        })
        .collect()
}

/// The envelope `exp(pi a^T Im(Z) a)` with `a = Im(Z)^{-1} Im v`; the scale
/// of `theta(Z, v)` against which its truncation error is measured.
pub fn shift_envelope(z: &PeriodPoint, v: &[Complex64]) -> f64 {
    let y = z.imag();
    let im_v = nalgebra::DVector::from_iterator(v.len(), v.iter().map(|c| c.im));
    let a = y.clone().cholesky().expect("Im Z positive definite").solve(&im_v);
    (PI * a.dot(&(&y * &a))).exp()
}

/// Theta with characteristics,
/// `sum_n exp(pi i (n+a)^T Z (n+a) + 2 pi i (n+a)^T (v+b))`.
///
/// `a` is reduced into `[-1/2, 1/2)^g` first; this is a reindexing of the
/// series and leaves the value unchanged.
pub fn theta_char(
    a: &RationalVector,
    b: &RationalVector,
    v: &[Complex64],
    z: &PeriodPoint,
    budget: &SeriesBudget,
) -> Complex64 {
    let g = z.g();
    assert_eq!(a.len(), g);
    assert_eq!(b.len(), g);
    assert_eq!(v.len(), g);
    let (reduced, _) = a.reduce_centered();
    let shift = reduced.to_f64();
    let vb: Vec<Complex64> = v
        .iter()
        .zip(b.to_f64())
        .map(|(vi, bi)| vi + Complex64::new(bi, 0.0))
        .collect();
    kernel::lattice_sum(&row_major(z.z()), &vb, &shift, &characteristic_box(&reduced, budget.radius))
}

fn mat_vec(z: &DMatrix<Complex64>, c: &[f64]) -> Vec<Complex64> {
    (0..z.nrows())
        .map(|i| (0..c.len()).map(|j| z[(i, j)] * c[j]).sum())
        .collect()
}

fn null_prefactor(zc: &[Complex64], c: &[f64]) -> Complex64 {
    let quad: Complex64 = zc.iter().zip(c).map(|(v, ci)| v * ci).sum();
    (Complex64::new(0.0, PI) * quad).exp()
}

/// `exp(pi i c^T Z c) * theta(Z, Z c)` at the representative of `c1` in
/// `[-1/2, 1/2)^g`, summed over the box of `characteristic_box`. Equals `theta[c1; 0](0, Z)`, hence depends only on
/// `c1 mod Z^g`, and is even in `c1`.
pub fn theta_null(c1: &RationalVector, z: &PeriodPoint, budget: &SeriesBudget) -> Complex64 {
    assert_eq!(c1.len(), z.g());
    let (reduced, _) = c1.reduce_centered();
    let c = reduced.to_f64();
    let zc = mat_vec(z.z(), &c);
    let zero = vec![0.0; z.g()];
    let sum = kernel::lattice_sum(&row_major(z.z()), &zc, &zero, &characteristic_box(&reduced, budget.radius));
    null_prefactor(&zc, &c) * sum
}

/// [`theta_null`] at `Z = X + k Id` through the product decomposition.
///
/// For integer symmetric `X` with even diagonal, `t^T X t` is even for every
/// integer `t`, so `theta(X + k Id, v) = theta(k Id, v)`, which is a product
/// of `g` one-dimensional series in `k`. The cube truncation is the product
/// of the axis truncations, so the same budget applies.
pub fn theta_null_fast(
    c1: &RationalVector,
    x: &DMatrix<i64>,
    k: Complex64,
    budget: &SeriesBudget,
) -> Result<Complex64> {
    let g = x.nrows();
    if !x.is_square() || c1.len() != g {
        return Err(Error::DimensionMismatch { expected: g, found: c1.len() });
    }
    if let Some(index) = (0..g).find(|&i| x[(i, i)] % 2 != 0) {
        return Err(Error::OddDiagonal { index, value: x[(index, index)] });
    }
    let (reduced, _) = c1.reduce_centered();
    let c = reduced.to_f64();
    let zc: Vec<Complex64> = (0..g)
        .map(|i| {
            let integer_part: f64 = (0..g).map(|j| x[(i, j)] as f64 * c[j]).sum();
            Complex64::new(integer_part, 0.0) + k * c[i]
        })
        .collect();
    let product: Complex64 = zc
        .iter()
        .zip(characteristic_box(&reduced, budget.radius))
        .map(|(&v, (lo, hi))| kernel::axis_sum(k, v, lo, hi))
        .product();
    Ok(null_prefactor(&zc, &c) * product)
}

/// Which series evaluates a theta constant at a given point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalPath {
    Direct,
    Fast,
}

impl PeriodPoint {
    pub fn eval_path(&self) -> EvalPath {
        if self.fast_split().is_some() {
            EvalPath::Fast
        } else {
            EvalPath::Direct
        }
    }
}

/// Theta constant by whichever path the point supports.
pub fn theta_constant(c1: &RationalVector, z: &PeriodPoint, budget: &SeriesBudget) -> Complex64 {
    match z.fast_split() {
        Some(split) => theta_null_fast(c1, &split.x, split.k, budget)
            .expect("fast split has even diagonal and matching dimension"),
        None => theta_null(c1, z, budget),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_point(tau: Complex64) -> PeriodPoint {
        PeriodPoint::new(DMatrix::from_element(1, 1, tau)).unwrap()
    }

    // Independent oracle: plain one-dimensional summation over a wide window.
    fn theta3_direct(tau: Complex64, v: Complex64, shift: f64, window: i64) -> Complex64 {
        (-window..=window)
            .map(|n| {
                let y = n as f64 + shift;
                (c(0.0, PI) * (tau * y * y + 2.0 * y * v)).exp()
            })
            .sum()
    }

    #[test]
    fn rejects_bad_period_points() {
        let asym = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.1, 0.0), c(0.0, 0.0), c(0.0, 1.0)]);
        assert!(matches!(PeriodPoint::new(asym), Err(Error::NotSymmetric { .. })));
        let indefinite = DMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 2.0), c(0.0, 2.0), c(0.0, 1.0)]);
        assert!(matches!(PeriodPoint::new(indefinite), Err(Error::NotPositiveDefinite(_))));
        let thin = DMatrix::from_element(1, 1, c(0.0, 0.01));
        assert!(matches!(PeriodPoint::new(thin), Err(Error::IllConditioned { .. })));
        assert!(PeriodPoint::from_split(DMatrix::from_element(1, 1, 0), c(1.0, -1.0)).is_err());
    }

    #[test]
    fn split_reconstructs_z() {
        let x = DMatrix::from_row_slice(3, 3, &[0, 0, 1, 0, 0, 2, 1, 2, 0]);
        let k = c(1.0, (1.0f64 / 3.0).sqrt());
        let p = PeriodPoint::from_split(x.clone(), k).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = c(x[(i, j)] as f64, 0.0) + if i == j { k } else { c(0.0, 0.0) };
                assert_eq!(p.z()[(i, j)], expected);
            }
        }
        assert_eq!(p.eval_path(), EvalPath::Fast);
        let odd = DMatrix::from_element(1, 1, 1);
        assert_eq!(PeriodPoint::from_split(odd, k).unwrap().eval_path(), EvalPath::Direct);
    }

    #[test]
    fn radius_domain_errors() {
        let one = DMatrix::from_element(1, 1, 1.0);
        assert!(truncation_radius(&one, 0.0).is_err());
        assert!(truncation_radius(&one, 1.0).is_err());
        assert!(truncation_radius(&DMatrix::from_element(1, 1, -1.0), 0.1).is_err());
    }

    #[test]
    fn radius_for_unit_scalar() {
        let one = DMatrix::from_element(1, 1, 1.0);
        let tight = truncation_radius(&one, 1e-12).unwrap();
        assert!(tight.radius <= 6);
        // Oracle: worst-case shifted tail summed directly.
        for &shift in &[-0.5, -0.25, 0.0, 0.3] {
            let tail: f64 = (-60i64..=60)
                .filter(|n| n.unsigned_abs() > tight.radius as u64)
                .map(|n| (-PI * (n as f64 + shift).powi(2)).exp())
                .sum();
            assert!(tail < 1e-12, "tail {tail} at shift {shift}");
        }
        assert!(tail_bound(1, 1.0, tight.radius - 1) >= 1e-12);
        let loose = truncation_radius(&one, 0.5).unwrap();
        assert!(loose.radius >= 1);
    }

    #[test]
    fn radius_in_two_dimensions_counts_cross_terms() {
        let id = DMatrix::<f64>::identity(2, 2);
        for &tol in &[1e-6, 1e-10, 1e-13] {
            let b2 = truncation_radius(&id, tol).unwrap();
            let s = 1.0 + 2.0 * (-PI / 4.0).exp() / (1.0 - (-2.0 * PI).exp());
            let b1 = SeriesBudget::new(1, 1.0, tol / (2.0 * s)).unwrap();
            assert_eq!(b1.radius, b2.radius);
            // Oracle: direct two-dimensional tail at the worst corner shift.
            let r = b2.radius as i64;
            let mut tail = 0.0;
            for t1 in -40i64..=40 {
                for t2 in -40i64..=40 {
                    if t1.abs().max(t2.abs()) > r {
                        tail += (-PI * ((t1 as f64 - 0.5).powi(2) + (t2 as f64 - 0.5).powi(2))).exp();
                    }
                }
            }
            assert!(tail < tol);
        }
    }

    #[test]
    fn tail_bound_is_monotone() {
        for &lambda in &[0.05, 0.3, 1.0, 4.0] {
            for g in 1..=5 {
                for r in 1..40 {
                    let (now, next) = (tail_bound(g, lambda, r), tail_bound(g, lambda, r + 1));
                    assert!(next < now || now == 0.0);
                }
            }
        }
    }

    #[test]
    fn scalar_anchor_value() {
        let z = scalar_point(c(0.0, 1.0));
        let budget = z.budget(1e-12).unwrap();
        let value = siegel_theta(&z, &[c(0.0, 0.0)], &budget);
        let oracle = theta3_direct(c(0.0, 1.0), c(0.0, 0.0), 0.0, 10);
        assert!((oracle.re - 1.086434811213308).abs() < 1e-15);
        assert!((value - c(1.086434811213308, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn diagonal_product_decomposition() {
        let z = PeriodPoint::new(DMatrix::from_diagonal_element(2, 2, c(0.0, 1.0))).unwrap();
        let budget = z.budget(1e-12).unwrap();
        let value = siegel_theta(&z, &[c(0.0, 0.0), c(0.0, 0.0)], &budget);
        let one = theta3_direct(c(0.0, 1.0), c(0.0, 0.0), 0.0, 10);
        assert!((value - one * one).norm() < 1e-12);
        assert!((value.re - 1.180_340_599_016_096).abs() < 1e-12);
    }

    #[test]
    fn odd_characteristic_vanishes() {
        let half = RationalVector::new(vec![Rational64::new(1, 2)]);
        for tau in [c(0.0, 1.0), c(0.3, 0.7), c(-1.2, 2.0)] {
            let z = scalar_point(tau);
            let budget = z.budget(1e-12).unwrap();
            assert!(theta_char(&half, &half, &[c(0.0, 0.0)], &z, &budget).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_characteristic_is_siegel_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z = PeriodPoint::random(3, &mut rng);
        let budget = z.budget(1e-12).unwrap();
        let v = vec![c(0.2, 0.1), c(-0.4, 0.3), c(0.1, -0.2)];
        let zero = RationalVector::zeros(3);
        let lhs = theta_char(&zero, &zero, &v, &z, &budget);
        let rhs = siegel_theta(&z, &v, &budget);
        assert!((lhs - rhs).norm() < 1e-12 * shift_envelope(&z, &v));
    }

    #[test]
    fn theta_null_matches_characteristic_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for g in 1..=3 {
            let z = PeriodPoint::random(g, &mut rng);
            let budget = z.budget(1e-12).unwrap();
            let c1 = RationalVector::from_fractions(&vec![3; g], &(5..5 + g as i64).collect::<Vec<_>>());
            let zero = RationalVector::zeros(g);
            let a = theta_null(&c1, &z, &budget);
            let b = theta_char(&c1, &zero, &vec![c(0.0, 0.0); g], &z, &budget);
            assert!((a - b).norm() < 1e-11, "g={g}: {a} vs {b}");
        }
    }

    #[test]
    fn theta_null_at_zero_characteristic() {
        let z = scalar_point(c(0.1, 1.3));
        let budget = z.budget(1e-12).unwrap();
        let zero = RationalVector::zeros(1);
        assert_eq!(theta_null(&zero, &z, &budget), siegel_theta(&z, &[c(0.0, 0.0)], &budget));
    }

    #[test]
    fn fast_path_small_case() {
        // g=1, X=(2), k=i, c1=1/3; both series summed to radius 10.
        let x = DMatrix::from_element(1, 1, 2);
        let k = c(0.0, 1.0);
        let p = PeriodPoint::from_split(x.clone(), k).unwrap();
        let budget = p.budget(1e-12).unwrap().with_radius(10);
        let c1 = RationalVector::from_fractions(&[1], &[3]);
        let fast = theta_null_fast(&c1, &x, k, &budget).unwrap();
        let direct = theta_null(&c1, &p, &budget);
        assert!((fast - direct).norm() < 1e-13);
        // and against the plain shifted series at Z = 2 + i
        let oracle = theta3_direct(c(2.0, 1.0), c(0.0, 0.0), 1.0 / 3.0, 20);
        assert!((fast - oracle).norm() < 1e-13);
    }

    #[test]
    fn fast_path_rejects_odd_diagonal() {
        let x = DMatrix::from_row_slice(2, 2, &[1, 0, 0, 0]);
        let budget = SeriesBudget::new(2, 1.0, 1e-12).unwrap();
        let c1 = RationalVector::zeros(2);
        assert!(matches!(
            theta_null_fast(&c1, &x, c(0.0, 1.0), &budget),
            Err(Error::OddDiagonal { index: 0, value: 1 })
        ));
    }

    #[test]
    fn fast_path_with_zero_x_matches_direct() {
        let x = DMatrix::<i64>::zeros(2, 2);
        let k = c(0.4, 0.9);
        let p = PeriodPoint::from_split(x.clone(), k).unwrap();
        let budget = p.budget(1e-12).unwrap();
        let c1 = RationalVector::from_fractions(&[1, -2], &[4, 7]);
        let fast = theta_null_fast(&c1, &x, k, &budget).unwrap();
        assert!((fast - theta_null(&c1, &p, &budget)).norm() < 2e-12);
    }

    #[test]
    fn generic_kernel_accepts_f32() {
        let value = kernel::axis_sum(Complex::<f32>::new(0.0, 1.0), Complex::new(0.0, 0.0), -6, 6);
        assert!((value.re - 1.086_434_8).abs() < 1e-5);
    }
}
