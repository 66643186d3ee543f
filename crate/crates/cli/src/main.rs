use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use tanglechar_core::invariants::{closure_equations, InvariantError, Presentation};
use tanglechar_core::links::{link_presentation, LinkError};
use tanglechar_core::oracle::{run_suite, sample_conditioned, sample_rng, SuiteName, SUITES};
use tanglechar_core::tangle::{component_count, parse_closure, Closure};
use tanglechar_core::witness::{witness_family, WitnessError};

mod dto;

use dto::*;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Unsupported(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Parser)]
#[command(name = "tanglechar", version, about = "Character-variety equations of arborescent knots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Source {
    /// Closure expression, e.g. `D([2] *v [1/3])`.
    expr: Option<String>,
    /// Read the expression from a file instead.
    #[arg(long, conflicts_with = "expr")]
    file: Option<PathBuf>,
}

impl Source {
    fn text(&self) -> Result<String, CliError> {
        match (&self.expr, &self.file) {
            (Some(e), _) => Ok(e.clone()),
            (None, Some(p)) => fs::read_to_string(p)
                .map(|s| s.trim().to_string())
                .map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
            (None, None) => Err(CliError::Input("no expression given".into())),
        }
    }

    fn closure(&self) -> Result<(String, Closure), CliError> {
        let text = self.text()?;
        let c = parse_closure(&text).map_err(input)?;
        Ok((text, c))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit the presentation of a knot (or a supported link).
    Emit {
        #[command(flatten)]
        source: Source,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use the two-trace link engine.
        #[arg(long)]
        link: bool,
    },
    /// Run oracle suites.
    Verify {
        /// Suite name or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, env = "TANGLECHAR_TOL", default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a t13-parameterized family of representations.
    Witness {
        #[arg(long, allow_hyphen_values = true)]
        t: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        t23: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        t34: Complex64,
        #[arg(long, allow_hyphen_values = true)]
        t14: Complex64,
        /// Comma-separated t13 values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "t13_count")]
        t13: Vec<Complex64>,
        /// Number of random t13 values.
        #[arg(long, default_value_t = 5)]
        t13_count: usize,
        /// JSON file with the pair `a1`, `a2`.
        #[arg(long)]
        pair_file: Option<PathBuf>,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, env = "TANGLECHAR_TOL", default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the number of components of a closure.
    Components {
        #[command(flatten)]
        source: Source,
    },
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Input(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serializes");
    s.push('\n');
    s
}

fn presentation(c: &Closure, link: bool) -> Result<Presentation, CliError> {
    if link {
        return link_presentation(c).map_err(|e| match e {
            LinkError::NotImplemented(m) => CliError::Unsupported(m),
            e => input(e),
        });
    }
    closure_equations(c).map_err(|e| match e {
        InvariantError::WrongEngine(n) => CliError::Input(format!("closure has {n} components; pass --link for links")),
        e => input(e),
    })
}

fn emit(source: &Source, format: Format, out: &Option<PathBuf>, link: bool) -> Result<(), CliError> {
    let (text, c) = source.closure()?;
    let p = presentation(&c, link)?;
    let body = match format {
        Format::Json => to_json(&PresentationDoc::new(&text, &p)),
        Format::Text => format!("# {TOOL} {VERSION}\n# input: {text}\n{}", p.render_text()),
    };
    write_out(out, &body)
}

fn verify(suite: &str, samples: usize, seed: u64, tol: f64, out: &Option<PathBuf>) -> Result<(), CliError> {
    let names: Vec<SuiteName> = if suite == "all" {
        SUITES.to_vec()
    } else {
        vec![SuiteName::parse(suite).ok_or_else(|| CliError::Input(format!("unknown suite `{suite}`")))?]
    };
    if tol.is_nan() || tol <= 0.0 {
        return Err(CliError::Input(format!("tolerance must be positive, got {tol}")));
    }
    let reports: Vec<_> = names.iter().map(|n| run_suite(*n, samples, seed, tol)).collect();
    let failed: Vec<_> = reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
    let doc = VerifyDoc {
        tool: TOOL.into(),
        version: VERSION.into(),
        input: suite.into(),
        seed,
        reports: reports.iter().map(SuiteDoc::from).collect(),
        passed: failed.is_empty(),
    };
    write_out(out, &to_json(&doc))?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Verification(failed.join(", ")))
    }
}

/// Largest admissible |det S| of the completed quadruple.
const GRAM_TOL: f64 = 1e-8;
/// Smallest admissible gap between the tr(a1 a3) values of a family.
const GAP_TOL: f64 = 1e-3;

#[allow(clippy::too_many_arguments)]
fn witness(
    t: Complex64,
    t23: Complex64,
    t34: Complex64,
    t14: Complex64,
    t13: &[Complex64],
    t13_count: usize,
    pair_file: &Option<PathBuf>,
    seed: u64,
    tol: f64,
    out: &Option<PathBuf>,
) -> Result<(), CliError> {
    let mut rng = sample_rng(seed, 0);
    let (a1, a2) = match pair_file {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            let pf: PairFile = serde_json::from_str(&text).map_err(input)?;
            (from_matrix(&pf.a1), from_matrix(&pf.a2))
        }
        None => (sample_conditioned(t, &mut rng), sample_conditioned(t, &mut rng)),
    };
    let t13s: Vec<Complex64> = if t13.is_empty() {
        (0..t13_count)
            .map(|k| Complex64::new(0.4 + 0.35 * k as f64, 0.2 + 0.15 * k as f64) + tanglechar_core::oracle::random_complex(&mut rng, 0.05))
            .collect()
    } else {
        t13.to_vec()
    };
    let family = witness_family(&a1, &a2, t, t23, t34, t14, &t13s, tol).map_err(|e| match e {
        WitnessError::Genericity(m) => CliError::Input(m),
        e => input(e),
    })?;
    let samples: Vec<_> = (0..family.samples.len()).map(|i| WitnessSampleDoc::new(&family, i)).collect();
    let sample_ok = |s: &WitnessSampleDoc| {
        s.ok && s.max_trace_error.is_some_and(|e| e <= tol)
            && s.gram_det4.is_some_and(|d| Complex64::new(d[0], d[1]).norm() < GRAM_TOL)
    };
    let gaps_ok = family.samples.len() < 2 || family.min_gap.is_some_and(|g| g > GAP_TOL);
    let passed = samples.iter().all(sample_ok) && gaps_ok;
    let doc = WitnessDoc {
        tool: TOOL.into(),
        version: VERSION.into(),
        input: WitnessInput {
            t: pair(t),
            t23: pair(t23),
            t34: pair(t34),
            t14: pair(t14),
            t13: t13s.iter().map(|z| pair(*z)).collect(),
            a1: matrix(&a1),
            a2: matrix(&a2),
        },
        seed,
        samples,
        min_gap: family.min_gap,
        passed,
    };
    write_out(out, &to_json(&doc))?;
    if passed {
        Ok(())
    } else {
        Err(CliError::Verification("witness family".into()))
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Emit { source, format, out, link } => emit(&source, format, &out, link),
        Command::Verify { suite, samples, seed, tol, out } => verify(&suite, samples, seed, tol, &out),
        Command::Witness { t, t23, t34, t14, t13, t13_count, pair_file, seed, tol, out } => {
            witness(t, t23, t34, t14, &t13, t13_count, &pair_file, seed, tol, &out)
        }
        Command::Components { source } => {
            let (_, c) = source.closure()?;
            println!("{}", component_count(&c));
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
