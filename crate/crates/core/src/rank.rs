//! Numeric rank certificates from a singular-value gap.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::RationalVector;
use crate::svd::singular_values;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RankStatus {
    Full,
    Deficient,
    Ambiguous,
}

/// Relative thresholds on `sigma_min / sigma_max`.
///
/// The defaults are placed between the two populations observed on the rank
/// matrices at the shipped presets: structurally deficient matrices sit at
/// the roundoff floor (`< 1e-15`), while the worst-conditioned full-rank
/// family, `(1,...,1,d)`, bottoms out near `2.1e-12` for g=4.
///
/// A small gap alone does not certify deficiency: a full-rank matrix whose
/// spectrum decays geometrically below working precision looks the same.
/// `deficient` also needs the kept singular values to stand at least
/// `separation` above the first discarded one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankThresholds {
    pub rank_tol: f64,
    pub accept: f64,
    pub reject: f64,
    #[serde(default = "default_separation")]
    pub separation: f64,
}

fn default_separation() -> f64 {
    1e10
}

impl Default for RankThresholds {
    fn default() -> Self {
        Self { rank_tol: 1e-13, accept: 1e-13, reject: 1e-14, separation: default_separation() }
    }
}

impl RankThresholds {
    /// Wider ambiguity band, adequate when the expected gaps are large.
    pub fn coarse() -> Self {
        Self { rank_tol: 1e-8, accept: 1e-6, reject: 1e-10, separation: default_separation() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.reject > 0.0
            && self.reject < self.accept
            && self.accept < 1.0
            && self.rank_tol > 0.0
            && self.rank_tol < 1.0
            && self.separation >= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "rank thresholds must satisfy 0 < reject < accept < 1, 0 < rank_tol < 1 and separation >= 1, got {self:?}"
            )))
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub w: RationalVector,
    pub sigma: Vec<f64>,
    pub rank: usize,
    pub gap: f64,
    pub status: RankStatus,
    /// Rows left after identifying rows that coincide identically (rank
    /// matrices only); fewer than the column count proves deficiency.
    pub distinct_rows: Option<usize>,
}

impl RankReport {
    pub fn is_full(&self) -> bool {
        self.status == RankStatus::Full
    }
}

/// Certifies the rank of `m` against its column count.
///
/// `status` is `full` when `sigma_last / sigma_1 > accept`, `deficient` when
/// it is below `reject` and the spectrum is separated at the numeric rank,
/// `ambiguous` otherwise; `rank` counts singular values above
/// `rank_tol * sigma_1`.
pub fn numeric_rank(m: &DMatrix<Complex64>, w: RationalVector, thresholds: &RankThresholds) -> Result<RankReport> {
    thresholds.validate()?;
    let columns = (0..m.ncols()).map(|j| m.column(j).iter().copied().collect()).collect();
    let sigma = singular_values(columns);
    Ok(report_from_sigma(w, sigma, thresholds))
}

pub(crate) fn report_from_sigma(w: RationalVector, sigma: Vec<f64>, thresholds: &RankThresholds) -> RankReport {
    let top = sigma.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return RankReport { w, sigma, rank: 0, gap: 0.0, status: RankStatus::Deficient, distinct_rows: None };
    }
    let gap = sigma.last().copied().unwrap_or(0.0) / top;
    let rank = sigma.iter().filter(|&&s| s > thresholds.rank_tol * top).count();
    let separated = match sigma.get(rank) {
        Some(&next) => sigma[rank - 1] >= thresholds.separation * next,
        None => true,
    };
    let status = if gap > thresholds.accept {
        RankStatus::Full
    } else if gap < thresholds.reject && separated {
        RankStatus::Deficient
    } else {
        RankStatus::Ambiguous
    };
    RankReport { w, sigma, rank, gap, status, distinct_rows: None }
}
