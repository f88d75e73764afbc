//! Run configuration: one JSON document, optionally overridden from the CLI.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normality::{iyer_threshold, necessary_h0, EvalOptions, DEFAULT_RANK_SERIES_TOL};
use crate::polarization::PolarizationType;
use crate::presets::{preset, preset_x, seeded_point};
use crate::rank::RankThresholds;
use crate::report::{ComplexValue, PeriodSource};
use crate::theta::PeriodPoint;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

/// Accepted keys; unknown keys are rejected with their position.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub g: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, rename = "X", skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Vec<i64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<ComplexValue>,
    #[serde(default, rename = "Z", skip_serializing_if = "Option::is_none")]
    pub z: Option<Vec<Vec<ComplexValue>>>,
    #[serde(default, alias = "random", skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accept: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reject: Option<f64>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub type_filter: Option<PolarizationType>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_h0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_h0: Option<u64>,
    #[serde(default)]
    pub force_numeric: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    pub fn new(g: usize) -> Self {
        Self { g, ..Self::default() }
    }

    pub fn with_preset(g: usize, name: &str) -> Self {
        Self { preset: Some(name.to_string()), ..Self::new(g) }
    }

    pub fn with_seed(g: usize, seed: u64) -> Self {
        Self { seed: Some(seed), ..Self::new(g) }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn thresholds(&self) -> RankThresholds {
        let base = RankThresholds::default();
        RankThresholds {
            rank_tol: self.rank_tol.unwrap_or(base.rank_tol),
            accept: self.accept.unwrap_or(base.accept),
            reject: self.reject.unwrap_or(base.reject),
            separation: base.separation,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            series_tol: self.series_tol.unwrap_or(DEFAULT_RANK_SERIES_TOL),
            thresholds: self.thresholds(),
            force_numeric: self.force_numeric,
        }
    }

    /// Explicit bounds or the defaults `[2^(g+1) - 1, 2^g * g!]`; the upper
    /// default is raised to the lower one when g = 1.
    pub fn h0_bounds(&self) -> (u64, u64) {
        let lo = self.min_h0.unwrap_or(necessary_h0(self.g).min(u64::MAX as u128) as u64);
        let hi = self.max_h0.unwrap_or_else(|| iyer_threshold(self.g).min(u64::MAX as u128).max(lo as u128) as u64);
        (lo, hi)
    }

    fn source_count(&self) -> usize {
        [self.preset.is_some(), self.x.is_some() || self.k.is_some(), self.z.is_some(), self.seed.is_some()]
            .iter()
            .filter(|&&b| b)
            .count()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("field `{field}`: {msg}")));
        if self.g == 0 {
            return bad("g", "must be at least 1".into());
        }
        if self.source_count() > 1 {
            return bad("preset/X/k/Z/seed", "give at most one period source".into());
        }
        if self.x.is_some() != self.k.is_some() {
            return bad(if self.x.is_some() { "k" } else { "X" }, "X and k must be given together".into());
        }
        if let Some(name) = &self.preset {
            let rows = preset_x(name)?.nrows();
            if rows != self.g {
                return bad("preset", format!("{name} has g = {rows}, config has g = {}", self.g));
            }
        }
        if let Some(x) = &self.x {
            if x.len() != self.g || x.iter().any(|r| r.len() != self.g) {
                return bad("X", format!("must be {0}x{0}", self.g));
            }
        }
        if let Some(z) = &self.z {
            if z.len() != self.g || z.iter().any(|r| r.len() != self.g) {
                return bad("Z", format!("must be {0}x{0}", self.g));
            }
        }
        if let Some(t) = &self.type_filter {
            if t.g() != self.g {
                return bad("type", format!("{t} has length {}, config has g = {}", t.g(), self.g));
            }
        }
        let (lo, hi) = self.h0_bounds();
        if lo == 0 || lo > hi {
            return bad("min_h0/max_h0", format!("need 1 <= min_h0 <= max_h0, got [{lo}, {hi}]"));
        }
        if let Some(tol) = self.series_tol {
            if !(tol > 0.0 && tol < 1.0) {
                return bad("series_tol", format!("must lie in (0, 1), got {tol}"));
            }
        }
        if self.jobs == Some(0) {
            return bad("jobs", "must be positive".into());
        }
        self.thresholds().validate().map_err(|e| Error::Config(format!("fields `rank_tol/accept/reject`: {e}")))
    }

    /// The configured period point, if any, with its provenance.
    pub fn period(&self) -> Result<Option<(PeriodPoint, PeriodSource)>> {
        if let Some(name) = &self.preset {
            return Ok(Some((preset(name)?, PeriodSource::Preset { name: name.clone() })));
        }
        if let (Some(x), Some(k)) = (&self.x, self.k) {
            let m = DMatrix::from_fn(self.g, self.g, |i, j| x[i][j]);
            let k = Complex64::from(k);
            let point = PeriodPoint::from_split(m.clone(), k)?;
            return Ok(Some((point, PeriodSource::split(&m, k))));
        }
        if let Some(z) = &self.z {
            let m = DMatrix::from_fn(self.g, self.g, |i, j| Complex64::from(z[i][j]));
            let point = PeriodPoint::new(m.clone())?;
            return Ok(Some((point, PeriodSource::explicit(&m))));
        }
        if let Some(seed) = self.seed {
            return Ok(Some((seeded_point(self.g, seed), PeriodSource::Random { seed })));
        }
        Ok(None)
    }
}
