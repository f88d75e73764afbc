//! The operations behind each CLI subcommand.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::invariants::{
    split_types, structural_suite, theta_identity_suite, IdentityCheck, StructuralSuiteOptions, SuiteOptions,
};
use crate::normality::{is_two_normal, necessary_h0, verdict, Decision};
use crate::polarization::{enumerate_types, PolarizationType};
use crate::presets::{preset, preset_x, seeded_point, DEFAULT_SEED, PRESET_G3, PRESET_G4};
use crate::rank::RankStatus;
use crate::rational::RationalVector;
use crate::report::{ComplexValue, PeriodSource, TypeReport};
use crate::structural::StructuralOptions;
use crate::theta::{theta_null, theta_null_fast, EvalPath, PeriodPoint, DEFAULT_SERIES_TOL};

fn dims(config: &RunConfig, d: &PolarizationType) -> Result<()> {
    if d.g() != config.g {
        return Err(Error::Usage(format!("type {d} has length {}, but g = {}", d.g(), config.g)));
    }
    Ok(())
}

fn check_with_point(
    config: &RunConfig,
    d: &PolarizationType,
    point: Option<&(PeriodPoint, PeriodSource)>,
) -> Result<TypeReport> {
    dims(config, d)?;
    let opts = config.eval_options();
    let v = verdict(d, point.map(|p| &p.0), &opts)?;
    let ran = !v.reports.is_empty();
    let (source, path) = match point {
        Some((z, s)) if ran => (s.clone(), Some(z.eval_path())),
        _ => (PeriodSource::None, None),
    };
    Ok(TypeReport::new(v, source, path, opts.series_tol, &opts.thresholds))
}

/// Verdict for one type at the configured point.
pub fn check(config: &RunConfig, d: &PolarizationType) -> Result<TypeReport> {
    config.validate()?;
    check_with_point(config, d, config.period()?.as_ref())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowFailure {
    #[serde(rename = "type")]
    pub polarization: PolarizationType,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub g: usize,
    pub min_h0: u64,
    pub max_h0: u64,
    pub period: PeriodSource,
    /// Not 2-normal at the point, or never normally generated.
    pub exceptional: Vec<PolarizationType>,
    pub ambiguous: Vec<PolarizationType>,
    pub failures: Vec<RowFailure>,
    pub rows: Vec<TypeReport>,
}

impl ScanSummary {
    pub fn is_clean(&self) -> bool {
        self.ambiguous.is_empty() && self.failures.is_empty()
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = jobs {
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Every type in the configured range (or the single configured type), in
/// `(h0, lexicographic)` order regardless of completion order.
pub fn scan(config: &RunConfig) -> Result<ScanSummary> {
    config.validate()?;
    let (min_h0, max_h0) = config.h0_bounds();
    let types = match &config.type_filter {
        Some(d) => vec![d.clone()],
        None => enumerate_types(config.g, min_h0, max_h0)?,
    };
    let point = config.period()?;
    let results: Vec<Result<TypeReport>> =
        pool(config.jobs)?.install(|| types.par_iter().map(|d| check_with_point(config, d, point.as_ref())).collect());

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (d, result) in types.into_iter().zip(results) {
        match result {
            Ok(row) => rows.push(row),
            Err(e) => failures.push(RowFailure { polarization: d, error: e.to_string() }),
        }
    }
    let pick = |f: fn(&TypeReport) -> bool| rows.iter().filter(|r| f(r)).map(|r| r.polarization.clone()).collect();
    Ok(ScanSummary {
        g: config.g,
        min_h0,
        max_h0,
        period: point.map(|p| p.1).unwrap_or(PeriodSource::None),
        exceptional: pick(TypeReport::is_exceptional),
        ambiguous: pick(TypeReport::has_ambiguity),
        failures,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub g: usize,
    pub seed: u64,
    pub points: Vec<String>,
    pub checks: Vec<IdentityCheck>,
    pub passed: bool,
}

/// Options that have no place in [`RunConfig`].
#[derive(Clone, Debug)]
pub struct InvariantOptions {
    pub samples: usize,
    pub random_points: usize,
    /// Include the full-vs-reduced rank comparison.
    pub rank_equality: bool,
    pub corrupt_row_order: bool,
}

impl Default for InvariantOptions {
    fn default() -> Self {
        Self { samples: 100, random_points: 3, rank_equality: true, corrupt_row_order: false }
    }
}

/// Theta identity suite for `config.g`, then the structural suite over the
/// split types in range at the configured point (if any) and at
/// `random_points` seeded random points.
pub fn verify_invariants(config: &RunConfig, extra: &InvariantOptions) -> Result<InvariantReport> {
    config.validate()?;
    let g = config.g;
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let series_tol = config.series_tol.unwrap_or(DEFAULT_SERIES_TOL);
    let suite = SuiteOptions { seed, samples: extra.samples, series_tol, ..SuiteOptions::default() };

    let mut points = Vec::new();
    if let Some((z, source)) = config.period()? {
        if !matches!(source, PeriodSource::Random { .. }) {
            points.push((format!("{source:?}"), z));
        }
    }
    for i in 0..extra.random_points as u64 {
        points.push((format!("random seed {}", seed + i), seeded_point(g, seed + i)));
    }
    let (min_h0, max_h0) = config.h0_bounds();
    let types = match &config.type_filter {
        Some(d) => vec![d.clone()],
        None => split_types(g, min_h0, max_h0)?,
    }
    .into_iter()
    .filter(|d| d.first_two().is_some())
    .collect::<Vec<_>>();
    let structural_opts = StructuralSuiteOptions {
        structural: StructuralOptions {
            series_tol,
            corrupt_row_order: extra.corrupt_row_order,
            ..StructuralOptions::default()
        },
        rank: config.eval_options(),
        rank_equality: extra.rank_equality,
    };

    let (identities, structural) = pool(config.jobs)?.install(|| {
        rayon::join(|| theta_identity_suite(g, &suite), || structural_suite(&types, &points, &structural_opts))
    });
    let mut checks = identities?;
    checks.extend(structural?);
    let passed = checks.iter().all(|c| c.passed);
    Ok(InvariantReport { g, seed, points: points.into_iter().map(|p| p.0).collect(), checks, passed })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Conjecture {
    /// `(1, 3, ..., 3, 6)` is not 2-normal.
    ThreeSix,
    /// `(1, ..., 1, d)` with `d >= 2^(g+1) - 1` is 2-normal.
    OneD,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceEntry {
    #[serde(rename = "type")]
    pub polarization: PolarizationType,
    pub period: PeriodSource,
    pub decision: Decision,
    pub statuses: Vec<RankStatus>,
    pub min_gap: f64,
    pub radius: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvidenceReport {
    pub conjecture: Conjecture,
    pub label: String,
    pub entries: Vec<EvidenceEntry>,
}

/// `(1, 3^(g-2), 6)`.
pub fn three_six_type(g: usize) -> Result<PolarizationType> {
    if g < 2 {
        return Err(Error::Usage("the (1,3,...,3,6) family needs g >= 2".into()));
    }
    let mut d = vec![1];
    d.extend(std::iter::repeat_n(3, g - 2));
    d.push(6);
    PolarizationType::new(d)
}

/// Numeric statuses for the conjectured families. For each `g`, the
/// configured point is used when its dimension matches, then the preset for
/// that `g` unless a seed was given, otherwise a seeded random point. `max_d` caps `d` for the `(1, ..., 1, d)` family.
pub fn conjecture_evidence(
    config: &RunConfig,
    conjecture: Conjecture,
    g_list: &[usize],
    max_d: Option<u64>,
) -> Result<EvidenceReport> {
    config.validate()?;
    let opts = config.eval_options();
    let seed = config.seed.unwrap_or(DEFAULT_SEED);
    let configured = config.period()?;
    let mut cases = Vec::new();
    for &g in g_list {
        if g == 0 {
            return Err(Error::Usage("g must be positive".into()));
        }
        let preset_name = [PRESET_G3, PRESET_G4].into_iter().find(|p| preset_x(p).is_ok_and(|x| x.nrows() == g));
        let point = match (&configured, preset_name) {
            (Some((z, source)), _) if z.g() == g => (z.clone(), source.clone()),
            (_, Some(name)) if config.seed.is_none() => (preset(name)?, PeriodSource::Preset { name: name.into() }),
            _ => (seeded_point(g, seed), PeriodSource::Random { seed }),
        };
        let types = match conjecture {
            Conjecture::ThreeSix => vec![three_six_type(g)?],
            Conjecture::OneD => {
                let lo = necessary_h0(g) as u64;
                let hi = max_d.unwrap_or(lo + 8).max(lo);
                (lo..=hi)
                    .map(|d| PolarizationType::new([vec![1; g - 1], vec![d]].concat()))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        cases.extend(types.into_iter().map(|d| (d, point.clone())));
    }
    let entries = pool(config.jobs)?.install(|| {
        cases
            .par_iter()
            .map(|(d, (z, source))| {
                let result = is_two_normal(z, d, &opts)?;
                Ok(EvidenceEntry {
                    polarization: d.clone(),
                    period: source.clone(),
                    statuses: result.reports.iter().map(|r| r.status).collect(),
                    min_gap: result.reports.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min),
                    radius: result.budget.radius,
                    decision: result.decision,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(EvidenceReport {
        conjecture,
        label: "numerical evidence at sampled period points; not a proof".into(),
        entries,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaValue {
    pub c1: RationalVector,
    pub reduced: RationalVector,
    pub series_tol: f64,
    pub radius: u32,
    pub direct: ComplexValue,
    pub fast: Option<ComplexValue>,
    pub eval_path: EvalPath,
}

/// Raw theta constant at the configured point, by both paths when possible.
pub fn theta_value(config: &RunConfig, c1: &RationalVector) -> Result<ThetaValue> {
    config.validate()?;
    let (z, _) = config.period()?.ok_or_else(|| Error::Usage("theta needs a period point".into()))?;
    if c1.len() != z.g() {
        return Err(Error::DimensionMismatch { expected: z.g(), found: c1.len() });
    }
    let series_tol = config.series_tol.unwrap_or(DEFAULT_SERIES_TOL);
    let budget = z.budget(series_tol)?;
    let fast = match z.fast_split() {
        Some(split) => Some(theta_null_fast(c1, &split.x, split.k, &budget)?.into()),
        None => None,
    };
    Ok(ThetaValue {
        c1: c1.clone(),
        reduced: c1.reduce_centered().0,
        series_tol,
        radius: budget.radius,
        direct: theta_null(c1, &z, &budget).into(),
        fast,
        eval_path: z.eval_path(),
    })
}
