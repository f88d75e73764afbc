//! Rank criteria built from theta constants for deciding 2-normality of
//! polarized abelian varieties of type `(d_1, ..., d_g)`, together with the
//! closed-form non-normality predicates, structural identity checks and the
//! scan/report harness used by the `thetanorm` CLI.

pub mod commands;
pub mod config;
pub mod error;
pub mod invariants;
pub mod normality;
pub mod polarization;
pub mod presets;
pub mod rank;
pub mod rational;
pub mod report;
pub mod structural;
pub mod svd;
pub mod theta;

pub use error::{Error, Result};
pub use normality::{verdict, Conclusion, EvalOptions, Verdict};
pub use polarization::{enumerate_types, index_sets, IndexSets, PolarizationType};
pub use rank::{numeric_rank, RankReport, RankStatus, RankThresholds};
pub use rational::RationalVector;
pub use theta::{PeriodPoint, SeriesBudget};
pub use config::RunConfig;
pub use report::{to_canonical_json, to_csv, TypeReport};
