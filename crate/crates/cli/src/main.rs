//! `polarize`: generate vector systems, enumerate the extrema of their
//! product polynomial, certify the identities, sweep families to CSV and
//! draw the hyperplane arrangements as SVG.

/// `println!` that stops quietly when stdout is closed (e.g. piped into `head`).
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

mod commands;
mod plot;
mod sweep;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

/// Exit status contract for scripts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok = 0,
    Io = 1,
    Usage = 2,
    Solve = 3,
    Gate = 4,
}

/// An error paired with the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub status: Status,
    pub error: anyhow::Error,
}

impl Failure {
    pub fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Usage,
            error: error.into(),
        }
    }
    pub fn solve(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Solve,
            error: error.into(),
        }
    }
    pub fn io(error: impl Into<anyhow::Error>) -> Self {
        Self {
            status: Status::Io,
            error: error.into(),
        }
    }
}

pub type CliResult<T = ()> = Result<T, Failure>;

#[derive(Parser, Debug)]
#[command(
    name = "polarize",
    version,
    about = "Extrema of products of linear forms on the sphere"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a vector system from a named family.
    Gen(GenArgs),
    /// Enumerate one extremal point per chamber.
    Solve(SolveArgs),
    /// Enumerate (or load) the extrema and write a certification report.
    Certify(CertifyArgs),
    /// Run families over a size range and write one CSV row per run.
    Sweep(SweepArgs),
    /// Draw the great-circle arrangement and extremal points as SVG.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
pub struct GenArgs {
    /// Family spec: orthonormal, random, random-basis, i2:m, a3, b3, h3,
    /// prism:m, or sum:<spec>+<spec>.
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Minimum pairwise angle (radians) for random families.
    #[arg(long, default_value_t = 0.05)]
    pub min_angle: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct SolverArgs {
    /// Worker threads for the chamber solves: a positive integer or `auto`.
    #[arg(long, default_value = "auto", value_parser = parse_parallelism)]
    pub parallelism: Parallelism,
    /// Largest number of vectors to enumerate (2^n sign patterns).
    #[arg(long, default_value_t = polarize_core::extrema::DEFAULT_PATTERN_BUDGET)]
    pub pattern_budget: usize,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// Vector system JSON.
    pub input: PathBuf,
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    /// Vector system JSON.
    pub input: PathBuf,
    /// Previously written extrema JSON for the same system.
    #[arg(long)]
    pub extrema: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long = "tol", value_parser = parse_override)]
    pub tolerances: Vec<(String, f64)>,
    /// Random test polynomials for the general identity (bases only).
    #[arg(long, default_value_t = 0)]
    pub random_g: usize,
    /// Sample count for the harmonicity residual.
    #[arg(long)]
    pub harmonicity: Option<usize>,
    /// Seed for the random polynomials and harmonicity samples.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Family names, comma separated or repeated.
    #[arg(long, required = true, value_delimiter = ',')]
    pub family: Vec<String>,
    /// Inclusive size range `a..b`, or a single size.
    #[arg(long, value_parser = sweep::parse_range)]
    pub n: sweep::SizeRange,
    /// Seeds per size, starting at `--seed`.
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ambient dimension for the `random` family.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    pub min_angle: f64,
    /// Record wall-clock times; without it `wall_ms` is 0 so output is reproducible.
    #[arg(long)]
    pub timing: bool,
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Vector system JSON (dimension 2 or 3).
    pub input: PathBuf,
    /// Previously written extrema JSON; computed when absent.
    #[arg(long)]
    pub extrema: Option<PathBuf>,
    /// Viewing direction `x,y,z` for 3-dimensional systems.
    #[arg(long, value_parser = plot::parse_view)]
    pub view: Option<[f64; 3]>,
    #[arg(short, long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Thread count for enumeration; `None` means the global pool.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Parallelism(pub Option<usize>);

fn parse_parallelism(s: &str) -> Result<Parallelism, String> {
    if s == "auto" {
        return Ok(Parallelism(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
        Ok(k) => Ok(Parallelism(Some(k))),
    }
}

fn parse_override(s: &str) -> Result<(String, f64), String> {
    use polarize_core::certify::Tolerances;
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    if !Tolerances::NAMES.contains(&name) {
        return Err(format!(
            "unknown tolerance `{name}` (known: {})",
            Tolerances::NAMES.join(", ")
        ));
    }
    let value: f64 = value
        .parse()
        .map_err(|_| format!("tolerance `{name}` needs a number, got `{value}`"))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(format!(
            "tolerance `{name}` must be finite and non-negative"
        ));
    }
    Ok((name.to_string(), value))
}

fn main() -> ExitCode {
    // clap exits with status 2 on usage errors by itself.
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::Certify(a) => commands::certify(&a),
        Command::Sweep(a) => sweep::run(&a),
        Command::Plot(a) => plot::run(&a),
    };
    match result {
        Ok(status) => ExitCode::from(status as u8),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.status as u8)
        }
    }
}
