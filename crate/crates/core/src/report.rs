//! Report records and their canonical JSON / CSV encodings.
//!
//! JSON output is pretty-printed with struct fields in declaration order and
//! every float written as `{:.16e}` (17 significant digits), so parsing a
//! report and writing it back reproduces the same bytes.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;
use crate::normality::{fail1_predicate, fail2_predicate, iyer_bound, necessary_condition, Conclusion, Reason, Verdict};
use crate::polarization::PolarizationType;
use crate::rank::{RankReport, RankThresholds};
use crate::theta::EvalPath;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(c: ComplexValue) -> Self {
        Complex64::new(c.re, c.im)
    }
}

/// Where a period point came from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum PeriodSource {
    Preset { name: String },
    Split { x: Vec<Vec<i64>>, k: ComplexValue },
    Explicit { z: Vec<Vec<ComplexValue>> },
    Random { seed: u64 },
    /// Every verdict was decided by a predicate.
    None,
}

impl PeriodSource {
    pub fn split(x: &DMatrix<i64>, k: Complex64) -> Self {
        Self::Split { x: x.row_iter().map(|r| r.iter().copied().collect()).collect(), k: k.into() }
    }

    pub fn explicit(z: &DMatrix<Complex64>) -> Self {
        Self::Explicit { z: z.row_iter().map(|r| r.iter().map(|&c| c.into()).collect()).collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicates {
    pub necessary: bool,
    pub fail1: bool,
    pub fail2: bool,
    pub iyer: bool,
}

impl Predicates {
    pub fn of(d: &PolarizationType) -> Self {
        Self {
            necessary: necessary_condition(d),
            fail1: fail1_predicate(d),
            fail2: fail2_predicate(d),
            iyer: iyer_bound(d),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub period: PeriodSource,
    pub eval_path: Option<EvalPath>,
    pub series_tol: f64,
    pub rank_tol: f64,
    pub accept: f64,
    pub reject: f64,
    pub radii: Vec<u32>,
}

/// Everything needed to audit one verdict without re-running it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeReport {
    #[serde(rename = "type")]
    pub polarization: PolarizationType,
    pub h0: u64,
    pub predicates: Predicates,
    pub numeric: Vec<RankReport>,
    pub verdict: Conclusion,
    pub reasons: Vec<Reason>,
    pub notes: Vec<String>,
    pub provenance: Provenance,
}

impl TypeReport {
    pub fn new(
        verdict: Verdict,
        period: PeriodSource,
        eval_path: Option<EvalPath>,
        series_tol: f64,
        thresholds: &RankThresholds,
    ) -> Self {
        let d = verdict.polarization;
        Self {
            h0: d.h0(),
            predicates: Predicates::of(&d),
            polarization: d,
            numeric: verdict.reports,
            verdict: verdict.conclusion,
            reasons: verdict.reasons,
            notes: verdict.notes,
            provenance: Provenance {
                period,
                eval_path,
                series_tol,
                rank_tol: thresholds.rank_tol,
                accept: thresholds.accept,
                reject: thresholds.reject,
                radii: verdict.radii,
            },
        }
    }

    pub fn is_exceptional(&self) -> bool {
        matches!(self.verdict, Conclusion::NeverNormallyGenerated | Conclusion::NotTwoNormalAtPoint)
    }

    pub fn has_ambiguity(&self) -> bool {
        self.verdict == Conclusion::Indeterminate
            || self.numeric.iter().any(|r| r.status == crate::rank::RankStatus::Ambiguous)
    }
}

/// Pretty JSON with fixed-width exponent floats.
struct CanonicalFormatter(PrettyFormatter<'static>);

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, f64::from(value))
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_array(writer)
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array(writer)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(writer, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_array_value(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object(writer)
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object(writer)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, writer: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(writer, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.begin_object_value(writer)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> io::Result<()> {
        self.0.end_object_value(writer)
    }
}

/// Canonical JSON text, newline-terminated.
pub fn to_canonical_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, CanonicalFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub const CSV_HEADER: [&str; 10] =
    ["type", "h0", "necessary", "fail1", "fail2", "iyer", "ranks", "gaps", "statuses", "verdict"];

fn join<T, F: Fn(&T) -> String>(items: &[T], f: F) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(";")
}

fn snake(value: &impl Serialize) -> String {
    match serde_json::to_value(value) {
        Ok(serde_json::Value::String(s)) => s,
        other => format!("{other:?}"),
    }
}

/// One line per report; per-`w` values are `;`-separated in `I'` order.
pub fn to_csv(rows: &[TypeReport]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(CSV_HEADER)?;
    for row in rows {
        writer.write_record([
            row.polarization.to_string(),
            row.h0.to_string(),
            row.predicates.necessary.to_string(),
            row.predicates.fail1.to_string(),
            row.predicates.fail2.to_string(),
            row.predicates.iyer.to_string(),
            join(&row.numeric, |r| r.rank.to_string()),
            join(&row.numeric, |r| format!("{:.16e}", r.gap)),
            join(&row.numeric, |r| snake(&r.status)),
            snake(&row.verdict),
        ])?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv of UTF-8 fields"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_use_fixed_exponent_form() {
        let text = to_canonical_json(&vec![0.1, 0.5e-12, 0.0, -3.0]).unwrap();
        assert!(text.contains("1.0000000000000001e-1"));
        assert!(text.contains("4.9999999999999999e-13"));
        assert!(text.contains("0.0000000000000000e0"));
        assert!(text.contains("-3.0000000000000000e0"));
        let back: Vec<f64> = from_json(&text).unwrap();
        assert_eq!(back, vec![0.1, 0.5e-12, 0.0, -3.0]);
        assert_eq!(to_canonical_json(&back).unwrap(), text);
    }

    #[test]
    fn csv_uses_lf_and_fixed_header() {
        let text = to_csv(&[]).unwrap();
        assert_eq!(text, "type,h0,necessary,fail1,fail2,iyer,ranks,gaps,statuses,verdict\n");
    }
}
