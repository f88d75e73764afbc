//! Executable versions of the structural identities behind the two
//! non-normality criteria.
//!
//! Fix the first position `i0` with `d_{i0} = 2` and `w = e_{i0} / 2`. Rows are
//! restricted to `K12` (coordinates after `i0`), columns split into
//! `Q1 = theta(u + z - w/2)` and `Q2 = theta(u + z + e_{i0}/2 - w/2)` for `z`
//! in `Z22` (half periods with coordinate `i0` equal to zero). Evenness of the
//! theta constants then forces
//!
//! * `(Q1 - Q2)[u, .] = 0` for 2-torsion `u`,
//! * `(Q1 - Q2)[u, .] = -(Q1 - Q2)[-u, .]` otherwise,
//! * equal row sums of `Q1` and `Q2` when every `u` is 4-torsion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::normality::{assemble_matrix, fail1_predicate, theta_matrix, EvalOptions};
use crate::polarization::{fractions, integer_box, PolarizationType};
use crate::rank::{numeric_rank, RankReport, RankStatus, RankThresholds};
use crate::rational::RationalVector;
use crate::svd::singular_values;
use crate::theta::{PeriodPoint, SeriesBudget};

/// Default slack on the per-entry error budget for "numerically zero".
pub const DEFAULT_SLACK: f64 = 10.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SplitIndexSets {
    /// 0-based position of the first `d_i = 2`.
    pub i0: usize,
    pub k12: Vec<RationalVector>,
    /// 2-torsion elements of `k12`, in `k12` order.
    pub k12_0: Vec<RationalVector>,
    pub z22: Vec<RationalVector>,
    pub w: RationalVector,
}

impl SplitIndexSets {
    pub fn new(d: &PolarizationType) -> Result<Self> {
        let i0 = d
            .first_two()
            .ok_or_else(|| Error::Precondition(format!("type {d} has no d_i = 2")))?;
        let g = d.g();
        let dv = d.divisors();
        // coordinates up to i0 are pinned to zero
        let k_bounds: Vec<u64> = (0..g).map(|a| if a > i0 { dv[a] } else { 1 }).collect();
        let k12: Vec<RationalVector> = integer_box(&k_bounds).iter().map(|t| fractions(t, &k_bounds)).collect();
        let k12_0 = k12.iter().filter(|u| u.scale(Rational64::from_integer(2)).is_integral()).cloned().collect();
        let z_bounds: Vec<u64> = (0..g).map(|a| if a == i0 { 1 } else { 2 }).collect();
        let z22 = integer_box(&z_bounds).iter().map(|t| fractions(t, &[2].repeat(g))).collect();
        let w = RationalVector::unit(g, i0, Rational64::new(1, 2));
        Ok(Self { i0, k12, k12_0, z22, w })
    }

    pub fn lambda_half(&self) -> RationalVector {
        self.w.clone()
    }

    /// For each row of `k12`, the row index of its negative.
    pub fn negation_map(&self) -> Vec<usize> {
        self.k12
            .iter()
            .map(|u| {
                let neg = -u;
                self.k12.iter().position(|v| v.congruent(&neg)).expect("K12 is a group")
            })
            .collect()
    }
}

/// Tolerances for the structural identities.
#[derive(Clone, Copy, Debug)]
pub struct StructuralOptions {
    /// Absolute error target of each theta constant.
    pub series_tol: f64,
    pub slack: f64,
    /// Negative-control hook: swaps two rows of `Q1` after assembly.
    #[doc(hidden)]
    pub corrupt_row_order: bool,
}

impl Default for StructuralOptions {
    fn default() -> Self {
        Self { series_tol: crate::theta::DEFAULT_SERIES_TOL, slack: DEFAULT_SLACK, corrupt_row_order: false }
    }
}

pub struct QMatrices {
    pub sets: SplitIndexSets,
    pub q1: DMatrix<Complex64>,
    pub q2: DMatrix<Complex64>,
    pub budget: SeriesBudget,
}

impl QMatrices {
    pub fn q(&self) -> DMatrix<Complex64> {
        let (rows, half) = self.q1.shape();
        DMatrix::from_fn(rows, 2 * half, |r, c| if c < half { self.q1[(r, c)] } else { self.q2[(r, c - half)] })
    }
}

fn build_with_budget(
    z: &PeriodPoint,
    d: &PolarizationType,
    budget: SeriesBudget,
    corrupt: bool,
) -> Result<QMatrices> {
    if z.g() != d.g() {
        return Err(Error::DimensionMismatch { expected: d.g(), found: z.g() });
    }
    let sets = SplitIndexSets::new(d)?;
    let quarter = sets.w.scale(Rational64::new(1, 2));
    let offset1 = -&quarter;
    let offset2 = &sets.lambda_half() - &quarter;
    let mut q1 = theta_matrix(z, &sets.k12, &sets.z22, &offset1, &budget);
    let q2 = theta_matrix(z, &sets.k12, &sets.z22, &offset2, &budget);
    if corrupt && q1.nrows() >= 2 {
        q1.swap_rows(0, 1);
    }
    Ok(QMatrices { sets, q1, q2, budget })
}

/// `Q1` and `Q2`, rows over `K12`, columns over `Z22`.
pub fn build_q(z: &PeriodPoint, d: &PolarizationType, opts: &StructuralOptions) -> Result<QMatrices> {
    build_with_budget(z, d, z.budget(opts.series_tol)?, opts.corrupt_row_order)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Clone, Debug)]
pub struct RankEquality {
    pub outcome: Outcome,
    pub full: RankReport,
    pub reduced: RankReport,
}

/// Rank of the full `K1`-indexed matrix at `w = e_{i0}/2` against the rank of
/// `Q = (Q1 Q2)`, both counted at `rank_tol`. Differing ranks are
/// inconclusive when either spectrum is ambiguous.
pub fn reduced_rank_equality(z: &PeriodPoint, d: &PolarizationType, opts: &EvalOptions) -> Result<RankEquality> {
    let budget = z.budget(opts.series_tol)?;
    let q = build_with_budget(z, d, budget, false)?;
    let full_m = assemble_matrix(z, d, &q.sets.w, &budget)?;
    let full = numeric_rank(&full_m, q.sets.w.clone(), &opts.thresholds)?;
    let reduced = numeric_rank(&q.q(), q.sets.w.clone(), &opts.thresholds)?;
    let outcome = if full.rank == reduced.rank {
        Outcome::Holds
    } else if full.status == RankStatus::Ambiguous || reduced.status == RankStatus::Ambiguous {
        Outcome::Inconclusive
    } else {
        Outcome::Fails
    };
    Ok(RankEquality { outcome, full, reduced })
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub holds: bool,
    /// Largest violation of the identity (absolute).
    pub max_residual: f64,
    pub threshold: f64,
    /// Numeric rank of `Q1 - Q2` and its structural bound (fail2 only).
    pub rank: Option<usize>,
    pub rank_bound: Option<usize>,
    /// Rank certificate of `Q = (Q1 Q2)` (fail1 only).
    pub q_report: Option<RankReport>,
}

/// Row sums of `Q1` and `Q2` agree, exhibiting a kernel vector of `Q`.
pub fn fail1_structural_witness(
    z: &PeriodPoint,
    d: &PolarizationType,
    opts: &StructuralOptions,
) -> Result<WitnessReport> {
    if !fail1_predicate(d) {
        return Err(Error::Precondition(format!("fail1 does not apply to {d}")));
    }
    let q = build_q(z, d, opts)?;
    let cols = q.q1.ncols();
    let max_residual = (0..q.q1.nrows())
        .map(|r| {
            let s1: Complex64 = q.q1.row(r).iter().sum();
            let s2: Complex64 = q.q2.row(r).iter().sum();
            (s1 - s2).norm()
        })
        .fold(0.0, f64::max);
    let threshold = opts.slack * (2 * cols) as f64 * 2.0 * q.budget.tol;
    let q_report = numeric_rank(&q.q(), q.sets.w.clone(), &RankThresholds::default())?;
    Ok(WitnessReport {
        holds: max_residual <= threshold,
        max_residual,
        threshold,
        rank: None,
        rank_bound: None,
        q_report: Some(q_report),
    })
}

/// Zero rows over `K12^0`, opposite rows over `K12^1`, and the resulting rank
/// bound `rank(Q1 - Q2) <= (|K12| - |K12^0|) / 2`.
pub fn fail2_structural_witness(
    z: &PeriodPoint,
    d: &PolarizationType,
    opts: &StructuralOptions,
) -> Result<WitnessReport> {
    let q = build_q(z, d, opts)?;
    let diff = &q.q1 - &q.q2;
    let (rows, cols) = diff.shape();
    let threshold = opts.slack * cols as f64 * 2.0 * q.budget.tol;
    let negation = q.sets.negation_map();
    let mut max_residual: f64 = 0.0;
    for (r, u) in q.sets.k12.iter().enumerate() {
        let torsion = q.sets.k12_0.contains(u);
        for c in 0..cols {
            let residual = if torsion { diff[(r, c)].norm() } else { (diff[(r, c)] + diff[(negation[r], c)]).norm() };
            max_residual = max_residual.max(residual);
        }
    }
    let rank_bound = (rows - q.sets.k12_0.len()) / 2;
    let rank = bounded_rank(&diff, threshold);
    Ok(WitnessReport {
        holds: max_residual <= threshold && rank <= rank_bound,
        max_residual,
        threshold,
        rank: Some(rank),
        rank_bound: Some(rank_bound),
        q_report: None,
    })
}

/// Singular values above both the relative rank tolerance and the absolute
/// perturbation floor `sqrt(rows * cols) * entry_threshold`.
fn bounded_rank(m: &DMatrix<Complex64>, entry_threshold: f64) -> usize {
    let columns = (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect();
    let sigma = singular_values(columns);
    let top = sigma.first().copied().unwrap_or(0.0);
    let floor = ((m.nrows() * m.ncols()) as f64).sqrt() * entry_threshold;
    let relative = RankThresholds::default().rank_tol * top;
    sigma.iter().filter(|&&s| s > floor.max(relative)).count()
}
