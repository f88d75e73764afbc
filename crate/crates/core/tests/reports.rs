use theta_normality::commands::{check, scan, ScanSummary};
use theta_normality::normality::Conclusion;
use theta_normality::rank::RankStatus;
use theta_normality::report::{from_json, PeriodSource};
use theta_normality::{to_canonical_json, to_csv, PolarizationType, RunConfig, TypeReport};

fn g3_config() -> RunConfig {
    RunConfig { min_h0: Some(15), max_h0: Some(24), ..RunConfig::with_preset(3, "paper-g3") }
}

#[test]
fn type_report_round_trips_byte_for_byte() {
    let d: PolarizationType = "1,3,6".parse().unwrap();
    let report = check(&RunConfig::with_preset(3, "paper-g3"), &d).unwrap();
    assert!(!report.numeric.is_empty());
    let text = to_canonical_json(&report).unwrap();
    let back: TypeReport = from_json(&text).unwrap();
    assert_eq!(back, report);
    assert_eq!(to_canonical_json(&back).unwrap(), text);
}

#[test]
fn scan_summary_round_trips_and_is_deterministic() {
    let first = scan(&g3_config()).unwrap();
    let second = scan(&RunConfig { jobs: Some(2), ..g3_config() }).unwrap();
    let text = to_canonical_json(&first).unwrap();
    assert_eq!(text, to_canonical_json(&second).unwrap());
    assert_eq!(to_csv(&first.rows).unwrap(), to_csv(&second.rows).unwrap());
    let back: ScanSummary = from_json(&text).unwrap();
    assert_eq!(to_canonical_json(&back).unwrap(), text);
}

#[test]
fn reports_carry_spectra_and_provenance() {
    let d: PolarizationType = "1,2,12".parse().unwrap();
    let report = check(&RunConfig::with_preset(3, "paper-g3"), &d).unwrap();
    assert_eq!(report.verdict, Conclusion::TwoNormalAtPoint);
    assert_eq!(report.provenance.period, PeriodSource::Preset { name: "paper-g3".into() });
    assert_eq!(report.numeric.len(), 4);
    for r in &report.numeric {
        assert_eq!(r.sigma.len(), 8);
        assert_eq!(r.status, RankStatus::Full);
    }
    assert_eq!(report.provenance.radii.len(), 1);

    let seeded = check(&RunConfig::with_seed(3, 9), &d).unwrap();
    assert_eq!(seeded.provenance.period, PeriodSource::Random { seed: 9 });
}

#[test]
fn csv_rows_follow_scan_order() {
    let summary = scan(&g3_config()).unwrap();
    let text = to_csv(&summary.rows).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), summary.rows.len() + 1);
    assert!(lines[1].starts_with("\"(1,1,15)\",15,"));
    assert!(!text.contains('\r'));
}

#[test]
fn forced_numerics_agree_with_predicates() {
    let config = RunConfig { force_numeric: true, ..RunConfig::with_preset(3, "paper-g3") };
    let summary = scan(&config).unwrap();
    for row in summary.rows.iter().filter(|r| r.predicates.fail1 || r.predicates.fail2) {
        assert!(row.numeric.iter().any(|r| r.status == RankStatus::Deficient), "{:?}", row.polarization);
    }
}
