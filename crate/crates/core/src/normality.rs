//! Rank matrices of theta constants, the 2-normality criterion, the
//! closed-form non-normality predicates and their combination into a
//! [`Verdict`].
//!
//! For a type `D` and `w` in `I'`, the matrix has rows `i in I`, columns
//! `j in J` and entries `theta_constant(i + j - w/2)`. `L` is 2-normal at the
//! period point exactly when every such matrix has rank `2^g`.

use std::collections::HashMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarization::{index_sets, PolarizationType};
use crate::rank::{numeric_rank, RankReport, RankStatus, RankThresholds};
use crate::rational::RationalVector;
use crate::theta::{theta_constant, PeriodPoint, SeriesBudget};

/// Series tolerance used for rank matrices. Tighter than
/// [`crate::theta::DEFAULT_SERIES_TOL`] because the smallest certified gaps
/// are near `1e-12` relative, and `sqrt(rows * cols)` entry errors add up.
pub const DEFAULT_RANK_SERIES_TOL: f64 = 1e-14;

/// Divisor applied to the series tolerance when a matrix comes back ambiguous.
pub const ESCALATION_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub series_tol: f64,
    pub thresholds: RankThresholds,
    /// Run the numeric criterion even when a predicate already decides.
    pub force_numeric: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { series_tol: DEFAULT_RANK_SERIES_TOL, thresholds: RankThresholds::default(), force_numeric: false }
    }
}

fn check_dims(z: &PeriodPoint, d: &PolarizationType) -> Result<()> {
    if z.g() != d.g() {
        return Err(Error::DimensionMismatch { expected: d.g(), found: z.g() });
    }
    Ok(())
}

/// Matrix with entries `theta_constant(row + col + offset)`.
pub fn theta_matrix(
    z: &PeriodPoint,
    rows: &[RationalVector],
    cols: &[RationalVector],
    offset: &RationalVector,
    budget: &SeriesBudget,
) -> DMatrix<Complex64> {
    let entries: Vec<Complex64> = rows
        .par_iter()
        .flat_map_iter(|r| {
            let shifted = r + offset;
            cols.iter().map(move |c| theta_constant(&(&shifted + c), z, budget))
        })
        .collect();
    DMatrix::from_row_slice(rows.len(), cols.len(), &entries)
}

/// The rank matrix for `w` with rows in `I` order and columns in `J` order.
pub fn assemble_matrix(
    z: &PeriodPoint,
    d: &PolarizationType,
    w: &RationalVector,
    budget: &SeriesBudget,
) -> Result<DMatrix<Complex64>> {
    check_dims(z, d)?;
    if w.len() != d.g() {
        return Err(Error::DimensionMismatch { expected: d.g(), found: w.len() });
    }
    let sets = index_sets(d);
    let offset = -&w.scale(Rational64::new(1, 2));
    Ok(theta_matrix(z, &sets.i, &sets.j, &offset, budget))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "decision", rename_all = "snake_case")]
pub enum Decision {
    TwoNormal,
    NotTwoNormal,
    Ambiguous { ambiguous_w: Vec<RationalVector> },
}

#[derive(Clone, Debug)]
pub struct TwoNormality {
    pub decision: Decision,
    pub reports: Vec<RankReport>,
    pub budget: SeriesBudget,
}

impl TwoNormality {
    pub fn deficient_count(&self) -> usize {
        self.reports.iter().filter(|r| r.status == RankStatus::Deficient).count()
    }
}

fn decide(reports: &[RankReport]) -> Decision {
    if reports.iter().all(RankReport::is_full) {
        Decision::TwoNormal
    } else if reports.iter().any(|r| r.status == RankStatus::Deficient) {
        Decision::NotTwoNormal
    } else {
        Decision::Ambiguous {
            ambiguous_w: reports
                .iter()
                .filter(|r| r.status == RankStatus::Ambiguous)
                .map(|r| r.w.clone())
                .collect(),
        }
    }
}

/// Number of distinct rows of the matrix at `w`. Rows `i` and `w - i`
/// coincide identically (theta constants are even and `Z^g`-periodic and
/// `J = -J`), so the rank is at most the number of orbits of `i -> w - i`.
pub fn distinct_rows(rows: &[RationalVector], w: &RationalVector) -> usize {
    let index: HashMap<RationalVector, usize> = rows.iter().enumerate().map(|(k, r)| (r.reduce_unit(), k)).collect();
    rows.iter()
        .enumerate()
        .filter(|(k, r)| index.get(&(w - *r).reduce_unit()).is_none_or(|partner| k <= partner))
        .count()
}

/// One rank certificate per `w in I'`, reported in `I'` order. A matrix
/// with fewer distinct rows than `2^g` is deficient whatever its spectrum.
pub fn is_two_normal_with_budget(
    z: &PeriodPoint,
    d: &PolarizationType,
    budget: &SeriesBudget,
    thresholds: &RankThresholds,
) -> Result<TwoNormality> {
    check_dims(z, d)?;
    thresholds.validate()?;
    let sets = index_sets(d);
    let reports = sets
        .i_prime
        .par_iter()
        .map(|w| {
            let m = assemble_matrix(z, d, w, budget)?;
            let mut report = numeric_rank(&m, w.clone(), thresholds)?;
            let bound = distinct_rows(&sets.i, w);
            if bound < d.target_rank() {
                report.status = RankStatus::Deficient;
            }
            report.distinct_rows = Some(bound);
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TwoNormality { decision: decide(&reports), reports, budget: *budget })
}

pub fn is_two_normal(z: &PeriodPoint, d: &PolarizationType, opts: &EvalOptions) -> Result<TwoNormality> {
    let budget = z.budget(opts.series_tol)?;
    is_two_normal_with_budget(z, d, &budget, &opts.thresholds)
}

/// Some `d_i = 2` and every `d_j <= 4`.
pub fn fail1_predicate(d: &PolarizationType) -> bool {
    d.first_two().is_some() && d.divisors().iter().all(|&x| x <= 4)
}

/// Some `d_i = 2` and `h0 = 2^(g+1)`.
pub fn fail2_predicate(d: &PolarizationType) -> bool {
    d.first_two().is_some() && u128::from(d.h0()) == 1u128 << (d.g() + 1)
}

/// `2^(g+1) - 1`, the smallest `h0` compatible with 2-normality.
pub fn necessary_h0(g: usize) -> u128 {
    (1u128 << (g + 1)) - 1
}

/// `h0 >= 2^(g+1) - 1`.
pub fn necessary_condition(d: &PolarizationType) -> bool {
    u128::from(d.h0()) >= necessary_h0(d.g())
}

/// `2^g * g!`; saturates for large g.
pub fn iyer_threshold(g: usize) -> u128 {
    (1..=g as u128).try_fold(1u128 << g.min(127), |acc, k| acc.checked_mul(k)).unwrap_or(u128::MAX)
}

/// `h0 > 2^g * g!`: normally generated whenever `A` is simple.
pub fn iyer_bound(d: &PolarizationType) -> bool {
    u128::from(d.h0()) > iyer_threshold(d.g())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    NeverNormallyGenerated,
    NormallyGeneratedGenericEvidence,
    TwoNormalAtPoint,
    NotTwoNormalAtPoint,
    Indeterminate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Reason {
    NecessaryConditionFails { h0: u64, required: u64 },
    Fail1,
    Fail2,
    IyerBound { threshold: u64, hypothesis: String },
    /// Refers to the rank reports stored on the verdict.
    Numeric { decision: Decision, series_tol: f64, radius: u32 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    #[serde(rename = "type")]
    pub polarization: PolarizationType,
    pub conclusion: Conclusion,
    pub reasons: Vec<Reason>,
    pub reports: Vec<RankReport>,
    pub radii: Vec<u32>,
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn has_ambiguity(&self) -> bool {
        self.reports.iter().any(|r| r.status == RankStatus::Ambiguous)
    }

    /// Not 2-normal at the point or never normally generated.
    pub fn is_exceptional(&self) -> bool {
        matches!(self.conclusion, Conclusion::NeverNormallyGenerated | Conclusion::NotTwoNormalAtPoint)
    }
}

/// Runs the criterion, re-running once with a tighter series tolerance if any
/// matrix is ambiguous. Returns every attempt in order.
fn numeric_with_escalation(
    z: &PeriodPoint,
    d: &PolarizationType,
    opts: &EvalOptions,
    notes: &mut Vec<String>,
) -> Result<Vec<TwoNormality>> {
    let first = is_two_normal(z, d, opts)?;
    if !matches!(first.decision, Decision::Ambiguous { .. }) {
        return Ok(vec![first]);
    }
    let tighter = first.budget.tightened(ESCALATION_FACTOR)?;
    notes.push(format!(
        "ambiguous gap at series tol {:e}; re-ran at {:e} (radius {} -> {})",
        first.budget.tol, tighter.tol, first.budget.radius, tighter.radius
    ));
    let second = is_two_normal_with_budget(z, d, &tighter, &opts.thresholds)?;
    if matches!(second.decision, Decision::Ambiguous { .. }) {
        notes.push(
            "still ambiguous: repeat at a different period point or with a wider scalar type before drawing conclusions"
                .into(),
        );
    }
    Ok(vec![first, second])
}

/// Combines the predicates and, when needed, the numeric criterion.
///
/// Order: dimension count, then `fail1` / `fail2`, then the simple-`A` bound,
/// then the rank criterion at `z`. Every predicate that holds is recorded.
pub fn verdict(d: &PolarizationType, z: Option<&PeriodPoint>, opts: &EvalOptions) -> Result<Verdict> {
    if let Some(z) = z {
        check_dims(z, d)?;
    }
    let mut reasons = Vec::new();
    let mut notes = Vec::new();
    let g = d.g();

    if !necessary_condition(d) {
        reasons.push(Reason::NecessaryConditionFails { h0: d.h0(), required: necessary_h0(g) as u64 });
    }
    let fail1 = fail1_predicate(d);
    let fail2 = fail2_predicate(d);
    if fail1 {
        reasons.push(Reason::Fail1);
    }
    if fail2 {
        reasons.push(Reason::Fail2);
    }
    if fail1 && g == 4 && d.divisors() == [1, 2, 4, 4] {
        notes.push("(1,2,4,4) is covered by fail1 and fail2 although it is often left out of g=4 never-normal lists".into());
    }
    let never = !reasons.is_empty();
    let iyer = !never && iyer_bound(d);
    if iyer {
        reasons.push(Reason::IyerBound {
            threshold: iyer_threshold(g).min(u64::MAX as u128) as u64,
            hypothesis: "A simple".into(),
        });
    }

    let run_numeric = if never || iyer { opts.force_numeric && z.is_some() } else { true };
    let mut reports = Vec::new();
    let mut radii = Vec::new();
    let mut numeric_decision = None;
    if run_numeric {
        let z = z.ok_or_else(|| {
            Error::Usage(format!("type {d} is not decided by a predicate; a period point is required"))
        })?;
        let attempts = numeric_with_escalation(z, d, opts, &mut notes)?;
        for attempt in &attempts {
            reasons.push(Reason::Numeric {
                decision: attempt.decision.clone(),
                series_tol: attempt.budget.tol,
                radius: attempt.budget.radius,
            });
            radii.push(attempt.budget.radius);
        }
        let last = attempts.into_iter().last().expect("at least one attempt");
        numeric_decision = Some(last.decision);
        reports = last.reports;
    }

    let conclusion = if never {
        Conclusion::NeverNormallyGenerated
    } else if iyer {
        Conclusion::NormallyGeneratedGenericEvidence
    } else {
        match numeric_decision.expect("numeric criterion ran") {
            Decision::TwoNormal => Conclusion::TwoNormalAtPoint,
            Decision::NotTwoNormal => Conclusion::NotTwoNormalAtPoint,
            Decision::Ambiguous { .. } => Conclusion::Indeterminate,
        }
    };
    Ok(Verdict { polarization: d.clone(), conclusion, reasons, reports, radii, notes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theta::theta_null;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t(d: &[u64]) -> PolarizationType {
        PolarizationType::new(d.to_vec()).unwrap()
    }

    fn tau_i() -> PeriodPoint {
        PeriodPoint::new(DMatrix::from_element(1, 1, Complex64::new(0.0, 1.0))).unwrap()
    }

    #[test]
    fn predicates() {
        assert!(fail1_predicate(&t(&[2, 2, 4])));
        assert!(!fail1_predicate(&t(&[1, 3, 6])));
        assert!(!fail1_predicate(&t(&[1, 2, 8])));
        assert!(fail2_predicate(&t(&[1, 2, 8])));
        assert!(!fail2_predicate(&t(&[1, 4, 4])));
        assert!(fail2_predicate(&t(&[1, 2, 2, 8])));
        assert!(!necessary_condition(&t(&[1, 1, 8])));
        assert!(necessary_condition(&t(&[1, 1, 15])));
        assert!(necessary_condition(&t(&[1, 1, 2, 16])));
        assert!(iyer_bound(&t(&[1, 7, 7])));
        assert!(!iyer_bound(&t(&[1, 1, 48])));
        assert!(iyer_bound(&t(&[1, 1, 1, 385])));
        assert!(!iyer_bound(&t(&[1, 1, 1, 384])));
    }

    #[test]
    fn distinct_row_counts() {
        let rows = |d: &[u64]| index_sets(&t(d)).i;
        let w0 = RationalVector::zeros(3);
        assert_eq!(distinct_rows(&rows(&[1, 1, 15]), &w0), 8);
        assert_eq!(distinct_rows(&rows(&[1, 1, 13]), &w0), 7);
        assert_eq!(distinct_rows(&rows(&[1, 1, 14]), &w0), 8);
        let w = RationalVector::from_fractions(&[0, 0, 1], &[1, 1, 14]);
        assert_eq!(distinct_rows(&rows(&[1, 1, 14]), &w), 7);
        // fixed-point-free involution on 16 rows
        assert_eq!(distinct_rows(&rows(&[2, 2, 4]), &RationalVector::from_fractions(&[1, 1, 1], &[2, 2, 4])), 8);
    }

    #[test]
    fn scalar_matrix_layout() {
        let z = tau_i();
        let budget = z.budget(1e-12).unwrap();
        let m = assemble_matrix(&z, &t(&[1]), &RationalVector::zeros(1), &budget).unwrap();
        assert_eq!(m.shape(), (1, 2));
        let half = RationalVector::from_fractions(&[1], &[2]);
        assert_eq!(m[(0, 0)], theta_null(&RationalVector::zeros(1), &z, &budget));
        assert_eq!(m[(0, 1)], theta_null(&half, &z, &budget));
    }

    #[test]
    fn elliptic_cubic_is_two_normal() {
        let result = is_two_normal(&tau_i(), &t(&[3]), &EvalOptions::default()).unwrap();
        assert_eq!(result.decision, Decision::TwoNormal);
        assert_eq!(result.reports.len(), 1);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(is_two_normal(&tau_i(), &t(&[1, 3]), &EvalOptions::default()).is_err());
    }

    #[test]
    fn verdict_requires_point_when_undecided() {
        assert!(matches!(verdict(&t(&[1, 2, 12]), None, &EvalOptions::default()), Err(Error::Usage(_))));
        let v = verdict(&t(&[2, 4, 4]), None, &EvalOptions::default()).unwrap();
        assert_eq!(v.conclusion, Conclusion::NeverNormallyGenerated);
        assert_eq!(v.reasons, vec![Reason::Fail1]);
        assert!(v.reports.is_empty());
        let v = verdict(&t(&[1, 7, 7]), None, &EvalOptions::default()).unwrap();
        assert_eq!(v.conclusion, Conclusion::NormallyGeneratedGenericEvidence);
    }

    #[test]
    fn all_triggered_reasons_are_recorded() {
        let v = verdict(&t(&[2, 2, 4]), None, &EvalOptions::default()).unwrap();
        assert_eq!(v.reasons, vec![Reason::Fail1, Reason::Fail2]);
        let v = verdict(&t(&[1, 2, 4]), None, &EvalOptions::default()).unwrap();
        assert_eq!(v.reasons.len(), 2);
        assert!(matches!(v.reasons[0], Reason::NecessaryConditionFails { h0: 8, required: 15 }));
    }

    #[test]
    fn forced_numerics_on_fail_type() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let z = PeriodPoint::random(2, &mut rng);
        let opts = EvalOptions { force_numeric: true, ..Default::default() };
        let v = verdict(&t(&[2, 4]), Some(&z), &opts).unwrap();
        assert_eq!(v.conclusion, Conclusion::NeverNormallyGenerated);
        assert!(v.reports.iter().any(|r| r.status == RankStatus::Deficient));
    }

    #[test]
    fn rows_never_repeat_within_reduced_i() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let z = PeriodPoint::random(2, &mut rng);
        let budget = z.budget(1e-12).unwrap();
        let d = t(&[3, 6]);
        let m = assemble_matrix(&z, &d, &RationalVector::zeros(2), &budget).unwrap();
        let sets = index_sets(&d);
        for a in 0..sets.i.len() {
            for b in (a + 1)..sets.i.len() {
                // rows coincide only for i' = -i (theta-null evenness at w = 0)
                let same = (0..4).all(|j| (m[(a, j)] - m[(b, j)]).norm() < 1e-10);
                assert_eq!(same, (&sets.i[a] + &sets.i[b]).is_integral(), "rows {a} {b}");
            }
        }
    }
}
