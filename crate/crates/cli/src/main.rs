//! `thetanorm`: 2-normality verdicts, type scans and invariant checks.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use theta_normality::commands::{self, Conjecture, InvariantOptions};
use theta_normality::config::OutputFormat;
use theta_normality::normality::Conclusion;
use theta_normality::report::{ComplexValue, TypeReport};
use theta_normality::{to_canonical_json, to_csv, Error, PolarizationType, RationalVector, RunConfig};

const EXIT_AMBIGUOUS: u8 = 1;
const EXIT_INVARIANT: u8 = 2;
const EXIT_USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "thetanorm", version, about = "Theta-constant rank criteria for 2-normality")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verdict for a single type.
    Check(RunArgs),
    /// Verdicts for every type in an h0 range.
    Scan(RunArgs),
    /// Theta identity and structural witness suites.
    VerifyInvariants {
        #[command(flatten)]
        run: RunArgs,
        /// Samples per theta identity.
        #[arg(long, default_value_t = 100)]
        samples: usize,
        /// Seeded random points for the structural suite.
        #[arg(long, default_value_t = 3)]
        random_points: usize,
        /// Skip the full-vs-reduced rank comparison.
        #[arg(long)]
        no_rank_equality: bool,
        #[arg(long, hide = true)]
        corrupt_index_order: bool,
    },
    /// Numeric statuses for the conjectured families.
    Conjecture {
        #[command(flatten)]
        run: RunArgs,
        /// 1: (1,3,...,3,6); 2: (1,...,1,d).
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        which: u8,
        /// Dimensions to test, comma-separated.
        #[arg(long = "g-list", value_delimiter = ',', default_value = "3,4")]
        g_list: Vec<usize>,
        /// Largest d for family 2 (default 2^(g+1) + 7).
        #[arg(long)]
        max_d: Option<u64>,
    },
    /// Evaluate one theta constant.
    Theta {
        #[command(flatten)]
        run: RunArgs,
        /// Characteristic, e.g. 1/2,1/3,0.
        #[arg(long, allow_hyphen_values = true)]
        c1: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    g: Option<usize>,
    /// Polarization type, e.g. 1,2,8.
    #[arg(long = "type")]
    polarization: Option<PolarizationType>,
    /// Named period point (paper-g3, paper-g4).
    #[arg(long)]
    preset: Option<String>,
    /// JSON file holding the integer matrix X of Z = X + k Id.
    #[arg(long = "X-file")]
    x_file: Option<PathBuf>,
    /// k as `re,im`.
    #[arg(long, allow_hyphen_values = true)]
    k: Option<String>,
    /// Seed for a random period point.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    series_tol: Option<f64>,
    #[arg(long)]
    rank_tol: Option<f64>,
    #[arg(long)]
    accept: Option<f64>,
    #[arg(long)]
    reject: Option<f64>,
    #[arg(long)]
    min_h0: Option<u64>,
    #[arg(long)]
    max_h0: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Run numerics even when a predicate decides.
    #[arg(long)]
    force_numeric: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    jobs: Option<usize>,
}

fn parse_k(text: &str) -> Result<ComplexValue, Error> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let bad = || Error::Usage(format!("--k expects `re,im`, got {text:?}"));
    match parts.as_slice() {
        [re, im] => Ok(ComplexValue { re: re.parse().map_err(|_| bad())?, im: im.parse().map_err(|_| bad())? }),
        _ => Err(bad()),
    }
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, Error> {
        self.config_or(None)
    }

    fn config_or(&self, fallback_g: Option<usize>) -> Result<RunConfig, Error> {
        let mut config = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        let x: Option<Vec<Vec<i64>>> = match &self.x_file {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                Some(serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?)
            }
            None => None,
        };
        let inferred = self
            .preset
            .as_deref()
            .and_then(|p| theta_normality::presets::preset_x(p).ok())
            .map(|x| x.nrows())
            .or_else(|| x.as_ref().map(Vec::len))
            .or_else(|| self.polarization.as_ref().map(PolarizationType::g))
            .or(fallback_g);
        if let Some(g) = self.g.or(inferred) {
            config.g = g;
        }
        if config.g == 0 {
            return Err(Error::Usage("give --g, --preset, --X-file, --type or a config file".into()));
        }
        if self.preset.is_some() || x.is_some() || self.k.is_some() || self.seed.is_some() {
            config.preset = None;
            config.x = None;
            config.k = None;
            config.z = None;
            config.seed = None;
        }
        config.preset = self.preset.clone().or(config.preset);
        config.x = x.or(config.x);
        if let Some(k) = &self.k {
            config.k = Some(parse_k(k)?);
        }
        config.seed = self.seed.or(config.seed);
        config.series_tol = self.series_tol.or(config.series_tol);
        config.rank_tol = self.rank_tol.or(config.rank_tol);
        config.accept = self.accept.or(config.accept);
        config.reject = self.reject.or(config.reject);
        config.min_h0 = self.min_h0.or(config.min_h0);
        config.max_h0 = self.max_h0.or(config.max_h0);
        config.type_filter = self.polarization.clone().or(config.type_filter);
        config.force_numeric |= self.force_numeric;
        config.jobs = self.jobs.or(config.jobs);
        config.out = self.out.clone().or(config.out);
        if let Some(f) = self.format {
            config.format = Some(match f {
                Format::Json => OutputFormat::Json,
                Format::Csv => OutputFormat::Csv,
            });
        }
        config.validate()?;
        Ok(config)
    }
}

fn emit(config: &RunConfig, text: &str) -> Result<(), Error> {
    match &config.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn render_rows(config: &RunConfig, rows: &[TypeReport], json: impl FnOnce() -> Result<String, Error>) -> Result<String, Error> {
    match config.format.unwrap_or_default() {
        OutputFormat::Csv => to_csv(rows),
        OutputFormat::Json => json(),
    }
}

fn run(command: Command) -> Result<u8, Error> {
    match command {
        Command::Check(args) => {
            let config = args.config()?;
            let d = config
                .type_filter
                .clone()
                .ok_or_else(|| Error::Usage("check needs --type".into()))?;
            let report = commands::check(&config, &d)?;
            emit(&config, &render_rows(&config, std::slice::from_ref(&report), || to_canonical_json(&report))?)?;
            eprintln!("{d}: {}", serde_json::to_value(report.verdict)?.as_str().unwrap_or("?"));
            Ok(if report.has_ambiguity() { EXIT_AMBIGUOUS } else { 0 })
        }
        Command::Scan(args) => {
            let config = args.config()?;
            let started = Instant::now();
            let summary = commands::scan(&config)?;
            emit(&config, &render_rows(&config, &summary.rows, || to_canonical_json(&summary))?)?;
            let list = |v: &[PolarizationType]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ");
            eprintln!(
                "g={} h0 in [{}, {}]: {} types in {:.1}s",
                summary.g,
                summary.min_h0,
                summary.max_h0,
                summary.rows.len() + summary.failures.len(),
                started.elapsed().as_secs_f64()
            );
            eprintln!("exceptional: {}", list(&summary.exceptional));
            let undecided = summary.rows.iter().filter(|r| r.verdict == Conclusion::Indeterminate).count();
            if !summary.is_clean() {
                eprintln!("ambiguous: {} (indeterminate verdicts: {undecided})", list(&summary.ambiguous));
                for f in &summary.failures {
                    eprintln!("failed: {}: {}", f.polarization, f.error);
                }
            }
            Ok(if summary.is_clean() { 0 } else { EXIT_AMBIGUOUS })
        }
        Command::VerifyInvariants { run, samples, random_points, no_rank_equality, corrupt_index_order } => {
            let config = run.config()?;
            let extra = InvariantOptions {
                samples,
                random_points,
                rank_equality: !no_rank_equality,
                corrupt_row_order: corrupt_index_order,
            };
            let report = commands::verify_invariants(&config, &extra)?;
            emit(&config, &to_canonical_json(&report)?)?;
            for c in &report.checks {
                eprintln!(
                    "{} g={} {:<28} samples={:<5} max_residual={:.3e} threshold={:.3e}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.g,
                    c.identity,
                    c.samples,
                    c.max_residual,
                    c.threshold
                );
            }
            Ok(if report.passed { 0 } else { EXIT_INVARIANT })
        }
        Command::Conjecture { run, which, g_list, max_d } => {
            let config = run.config_or(g_list.first().copied())?;
            let conjecture = if which == 1 { Conjecture::ThreeSix } else { Conjecture::OneD };
            let report = commands::conjecture_evidence(&config, conjecture, &g_list, max_d)?;
            emit(&config, &to_canonical_json(&report)?)?;
            let ambiguous = report
                .entries
                .iter()
                .any(|e| matches!(e.decision, theta_normality::normality::Decision::Ambiguous { .. }));
            Ok(if ambiguous { EXIT_AMBIGUOUS } else { 0 })
        }
        Command::Theta { run, c1 } => {
            let config = run.config()?;
            let c1: RationalVector = c1.parse()?;
            let value = commands::theta_value(&config, &c1)?;
            emit(&config, &to_canonical_json(&value)?)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
