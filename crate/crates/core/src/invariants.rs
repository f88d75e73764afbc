//! Seeded property suites: theta identities and the structural witnesses.
//!
//! Each identity compares two evaluations, each within the series tolerance
//! `tol` of the exact value after normalizing by [`shift_envelope`], so the
//! per-sample error budget is `2 tol` and a check passes when the largest
//! residual stays below `slack * 2 tol`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::normality::{fail1_predicate, fail2_predicate, EvalOptions};
use crate::polarization::{enumerate_types, PolarizationType};
use crate::rank::RankStatus;
use crate::rational::RationalVector;
use crate::structural::{
    fail1_structural_witness, fail2_structural_witness, reduced_rank_equality, Outcome, StructuralOptions,
    DEFAULT_SLACK,
};
use crate::theta::{shift_envelope, siegel_theta, theta_null, theta_null_fast, PeriodPoint, DEFAULT_SERIES_TOL};

/// One identity (or structural check) aggregated over its samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub g: usize,
    pub samples: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
}

impl IdentityCheck {
    fn from_residuals(identity: &str, g: usize, residuals: &[f64], threshold: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let passed = residuals.iter().all(|r| r.is_finite() && *r <= threshold);
        Self { identity: identity.into(), g, samples: residuals.len(), max_residual, threshold, passed, failures: vec![] }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteOptions {
    pub seed: u64,
    pub samples: usize,
    pub series_tol: f64,
    pub slack: f64,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: crate::presets::DEFAULT_SEED, samples: 100, series_tol: DEFAULT_SERIES_TOL, slack: DEFAULT_SLACK }
    }
}

fn random_characteristic<R: Rng>(g: usize, rng: &mut R) -> RationalVector {
    let entries = (0..g)
        .map(|_| {
            let den = rng.gen_range(1..=12i64);
            Rational64::new(rng.gen_range(-2 * den..=2 * den), den)
        })
        .collect();
    RationalVector::new(entries)
}

/// `v = x + Z a` with `x` in `[-1, 1]^g` and `a` in `[-1/2, 1/2]^g`.
fn random_argument<R: Rng>(z: &PeriodPoint, rng: &mut R) -> Vec<Complex64> {
    let g = z.g();
    let a: Vec<f64> = (0..g).map(|_| rng.gen_range(-0.5..=0.5)).collect();
    (0..g)
        .map(|i| {
            let za: Complex64 = (0..g).map(|j| z.z()[(i, j)] * a[j]).sum();
            Complex64::new(rng.gen_range(-1.0..=1.0), 0.0) + za
        })
        .collect()
}

fn random_integer_vector<R: Rng>(g: usize, bound: i64, rng: &mut R) -> Vec<i64> {
    (0..g).map(|_| rng.gen_range(-bound..=bound)).collect()
}

/// Integer symmetric with even diagonal.
fn random_even_shift<R: Rng>(g: usize, rng: &mut R) -> DMatrix<i64> {
    let mut x = DMatrix::<i64>::zeros(g, g);
    for i in 0..g {
        x[(i, i)] = 2 * rng.gen_range(-1..=1);
        for j in (i + 1)..g {
            let value = rng.gen_range(-2..=2);
            x[(i, j)] = value;
            x[(j, i)] = value;
        }
    }
    x
}

fn shifted(v: &[Complex64], m: &[i64]) -> Vec<Complex64> {
    v.iter().zip(m).map(|(vi, &mi)| vi + Complex64::new(mi as f64, 0.0)).collect()
}

/// `exp(pi i c^T Z c) theta(Z, Z c)` at `c = c1` without reducing `c1`,
/// on a cube wide enough to contain the shifted box around `-c`.
fn theta_null_unreduced(c1: &RationalVector, z: &PeriodPoint, tol: f64) -> Result<Complex64> {
    let c = c1.to_f64();
    let g = z.g();
    let zc: Vec<Complex64> = (0..g).map(|i| (0..g).map(|j| z.z()[(i, j)] * c[j]).sum()).collect();
    let quad: Complex64 = zc.iter().zip(&c).map(|(v, ci)| v * ci).sum();
    let reach = c.iter().fold(0.0f64, |m, x| m.max(x.abs())).ceil() as u32 + 1;
    let budget = z.budget(tol)?;
    let wide = budget.with_radius(budget.radius + reach);
    Ok((Complex64::new(0.0, std::f64::consts::PI) * quad).exp() * siegel_theta(z, &zc, &wide))
}

/// Parity, lattice periodicity, characteristic reduction, invariance under
/// `Z -> Z + X` (even-diagonal `X`), fast-path equivalence, null symmetry
/// and convergence from `R` to `R + 2`, each on `opts.samples` samples.
pub fn theta_identity_suite(g: usize, opts: &SuiteOptions) -> Result<Vec<IdentityCheck>> {
    let tol = opts.series_tol;
    let threshold = opts.slack * 2.0 * tol;
    let identities = [
        "parity",
        "lattice_periodicity",
        "characteristic_reduction",
        "transformation_invariance",
        "fast_path_equivalence",
        "null_symmetry",
        "convergence",
    ];
    identities
        .par_iter()
        .enumerate()
        .map(|(which, &name)| {
            let residuals = (0..opts.samples)
                .into_par_iter()
                .map(|s| {
                    let stream = opts.seed ^ ((g as u64) << 48) ^ ((which as u64) << 40) ^ s as u64;
                    let mut rng = ChaCha8Rng::seed_from_u64(stream);
                    identity_residual(which, g, tol, &mut rng)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(IdentityCheck::from_residuals(name, g, &residuals, threshold))
        })
        .collect()
}

fn identity_residual<R: Rng>(which: usize, g: usize, tol: f64, rng: &mut R) -> Result<f64> {
    let z = PeriodPoint::random(g, rng);
    let budget = z.budget(tol)?;
    let residual = match which {
        0 => {
            let v = random_argument(&z, rng);
            let neg: Vec<Complex64> = v.iter().map(|x| -x).collect();
            (siegel_theta(&z, &neg, &budget) - siegel_theta(&z, &v, &budget)).norm() / shift_envelope(&z, &v)
        }
        1 => {
            let v = random_argument(&z, rng);
            let m = random_integer_vector(g, 2, rng);
            (siegel_theta(&z, &shifted(&v, &m), &budget) - siegel_theta(&z, &v, &budget)).norm()
                / shift_envelope(&z, &v)
        }
        2 => {
            let c1 = random_characteristic(g, rng);
            (theta_null(&c1, &z, &budget) - theta_null_unreduced(&c1, &z, tol)?).norm()
        }
        3 => {
            let v = random_argument(&z, rng);
            let moved = z.shifted_by(&random_even_shift(g, rng))?;
            (siegel_theta(&moved, &v, &budget) - siegel_theta(&z, &v, &budget)).norm() / shift_envelope(&z, &v)
        }
        4 => {
            let x = random_even_shift(g, rng);
            let k = Complex64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(0.6..=1.5));
            let split = PeriodPoint::from_split(x.clone(), k)?;
            let budget = split.budget(tol)?;
            let c1 = random_characteristic(g, rng);
            (theta_null_fast(&c1, &x, k, &budget)? - theta_null(&c1, &split, &budget)).norm()
        }
        5 => {
            let c1 = random_characteristic(g, rng);
            (theta_null(&c1, &z, &budget) - theta_null(&-&c1, &z, &budget)).norm()
        }
        _ => {
            let c1 = random_characteristic(g, rng);
            let wider = budget.with_radius(budget.radius + 2);
            let v = random_argument(&z, rng);
            let constant = (theta_null(&c1, &z, &budget) - theta_null(&c1, &z, &wider)).norm();
            let general =
                (siegel_theta(&z, &v, &budget) - siegel_theta(&z, &v, &wider)).norm() / shift_envelope(&z, &v);
            constant.max(general)
        }
    };
    Ok(residual)
}

/// Options for [`structural_suite`].
#[derive(Clone, Debug)]
pub struct StructuralSuiteOptions {
    pub structural: StructuralOptions,
    pub rank: EvalOptions,
    /// Run the full-vs-reduced rank comparison too.
    pub rank_equality: bool,
}

impl Default for StructuralSuiteOptions {
    fn default() -> Self {
        Self { structural: StructuralOptions::default(), rank: EvalOptions::default(), rank_equality: true }
    }
}

struct Tally {
    name: &'static str,
    g: usize,
    samples: usize,
    max_residual: f64,
    threshold: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str, g: usize) -> Self {
        Self { name, g, samples: 0, max_residual: 0.0, threshold: 0.0, failures: vec![] }
    }

    fn record(&mut self, residual: f64, threshold: f64, ok: bool, label: impl FnOnce() -> String) {
        self.samples += 1;
        self.max_residual = self.max_residual.max(residual);
        self.threshold = self.threshold.max(threshold);
        if !ok {
            self.failures.push(label());
        }
    }

    fn finish(self) -> IdentityCheck {
        IdentityCheck {
            identity: self.name.into(),
            g: self.g,
            samples: self.samples,
            max_residual: self.max_residual,
            threshold: self.threshold,
            passed: self.failures.is_empty(),
            failures: self.failures,
        }
    }
}

/// Types in `[min_h0, max_h0]` with some `d_i = 2`.
pub fn split_types(g: usize, min_h0: u64, max_h0: u64) -> Result<Vec<PolarizationType>> {
    Ok(enumerate_types(g, min_h0, max_h0)?.into_iter().filter(|d| d.first_two().is_some()).collect())
}

/// Zero-row / opposite-row identities and the `Q1 - Q2` rank bound for every
/// type, the column-sum identity (with a deficient `Q`) for fail1 types, the
/// fail2 bound `2^(g-1) - 1`, and optionally the full-vs-reduced rank
/// equality, at every point.
pub fn structural_suite(
    types: &[PolarizationType],
    points: &[(String, PeriodPoint)],
    opts: &StructuralSuiteOptions,
) -> Result<Vec<IdentityCheck>> {
    let mut by_g: Vec<usize> = types.iter().map(PolarizationType::g).collect();
    by_g.sort_unstable();
    by_g.dedup();
    let mut out = Vec::new();
    for g in by_g {
        let cases: Vec<(&PolarizationType, &(String, PeriodPoint))> = types
            .iter()
            .filter(|d| d.g() == g)
            .flat_map(|d| points.iter().filter(move |p| p.1.g() == g).map(move |p| (d, p)))
            .collect();
        let results = cases
            .par_iter()
            .map(|(d, (label, z))| structural_case(d, z, opts).map(|r| (format!("{d} at {label}"), (*d).clone(), r)))
            .collect::<Result<Vec<_>>>()?;

        let mut rows = Tally::new("q_difference_rows", g);
        let mut fail2 = Tally::new("fail2_rank_bound", g);
        let mut fail1 = Tally::new("fail1_column_sums", g);
        let mut equality = Tally::new("reduced_rank_equality", g);
        for (label, d, case) in results {
            let w2 = &case.fail2;
            rows.record(w2.max_residual, w2.threshold, w2.holds, || {
                format!("{label}: residual {:e}, rank {:?} > bound {:?}", w2.max_residual, w2.rank, w2.rank_bound)
            });
            if fail2_predicate(&d) {
                let bound = (1usize << (g - 1)) - 1;
                let rank = w2.rank.unwrap_or(usize::MAX);
                fail2.record(w2.max_residual, w2.threshold, w2.holds && rank <= bound, || {
                    format!("{label}: rank(Q1 - Q2) = {rank} > {bound}")
                });
            }
            if let Some(w1) = &case.fail1 {
                let deficient = w1.q_report.as_ref().is_some_and(|r| r.status == RankStatus::Deficient);
                fail1.record(w1.max_residual, w1.threshold, w1.holds && deficient, || {
                    format!("{label}: residual {:e}, Q deficient: {deficient}", w1.max_residual)
                });
            }
            if let Some(outcome) = case.equality {
                equality.record(0.0, 0.0, outcome == Outcome::Holds, || format!("{label}: {outcome:?}"));
            }
        }
        for tally in [rows, fail2, fail1, equality] {
            if tally.samples > 0 {
                out.push(tally.finish());
            }
        }
    }
    Ok(out)
}

struct CaseResult {
    fail2: crate::structural::WitnessReport,
    fail1: Option<crate::structural::WitnessReport>,
    equality: Option<Outcome>,
}

fn structural_case(d: &PolarizationType, z: &PeriodPoint, opts: &StructuralSuiteOptions) -> Result<CaseResult> {
    let fail2 = fail2_structural_witness(z, d, &opts.structural)?;
    let fail1 =
        if fail1_predicate(d) { Some(fail1_structural_witness(z, d, &opts.structural)?) } else { None };
    let equality =
        if opts.rank_equality { Some(reduced_rank_equality(z, d, &opts.rank)?.outcome) } else { None };
    Ok(CaseResult { fail2, fail1, equality })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identities_hold_in_low_dimension() {
        let opts = SuiteOptions { samples: 20, ..SuiteOptions::default() };
        for g in 1..=2 {
            for check in theta_identity_suite(g, &opts).unwrap() {
                assert!(check.passed, "{check:?}");
                assert_eq!(check.samples, 20);
            }
        }
    }

    #[test]
    fn unreduced_evaluation_agrees_with_reduced() {
        let z = crate::presets::seeded_point(2, 3);
        let c1 = RationalVector::from_fractions(&[7, -5], &[4, 3]);
        let budget = z.budget(1e-12).unwrap();
        let diff = theta_null(&c1, &z, &budget) - theta_null_unreduced(&c1, &z, 1e-12).unwrap();
        assert!(diff.norm() < 1e-11);
    }

    #[test]
    fn structural_suite_flags_corrupted_order() {
        let d = PolarizationType::new(vec![1, 2, 8]).unwrap();
        let points = vec![("seed 1".to_string(), crate::presets::seeded_point(3, 1))];
        let good = structural_suite(std::slice::from_ref(&d), &points, &StructuralSuiteOptions::default()).unwrap();
        assert!(good.iter().all(|c| c.passed), "{good:?}");
        let mut opts = StructuralSuiteOptions { rank_equality: false, ..Default::default() };
        opts.structural.corrupt_row_order = true;
        let bad = structural_suite(&[d], &points, &opts).unwrap();
        assert!(!bad.iter().find(|c| c.identity == "q_difference_rows").unwrap().passed);
    }
}
