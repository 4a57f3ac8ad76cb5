use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lu_invariants::invariants::InvariantKind;
use lu_invariants::states::SystemShape;
use lu_invariants::Error;

mod commands;

#[derive(Parser, Debug)]
#[command(name = "luinv", version, about = "Generators of the algebra of local unitary invariants")]
struct Cli {
    #[command(flatten)]
    config: Config,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Config {
    /// Master seed for all random states and unitaries.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Cap on enumeration size (m!)^(k-1) and on contraction term counts.
    #[arg(long, global = true, default_value_t = 1_000_000_000)]
    pub budget: u128,
    #[arg(long, global = true, value_enum, default_value_t = Format::Plain)]
    pub format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report degrees as 2m (total polynomial degree) instead of m.
    #[arg(long, global = true)]
    pub full_degree: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
    Plain,
    Dot,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum KindArg {
    Pure,
    Mixed,
}

impl From<KindArg> for InvariantKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Pure => InvariantKind::Pure,
            KindArg::Mixed => InvariantKind::Mixed,
        }
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Series,
    Invariance,
    Multiplicativity,
    Basis,
    Independence,
    PureMixed,
    Padding,
    Conjugation,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List canonical tuple orbits (isomorphism classes of m-fold coverings).
    Orbits {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        /// Only connected coverings (transitive tuples).
        #[arg(long)]
        connected: bool,
    },
    /// Graded dimensions and generator counts per degree.
    Count {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        max_m: usize,
    },
    /// Evaluate one invariant on a state file.
    Eval {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        orbit: PathBuf,
        /// Overrides the kind recorded in the orbit file (default pure).
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Factor an orbit invariant into connected generators.
    Factor {
        #[arg(long)]
        orbit: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<KindArg>,
    },
    /// Run verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Run every suite.
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum)]
    pub suite: Vec<Suite>,
    #[arg(long)]
    pub k: usize,
    /// Check this degree only.
    #[arg(long)]
    pub m: Option<usize>,
    /// Check degrees 1..=max-m.
    #[arg(long)]
    pub max_m: Option<usize>,
    /// Party dimensions, e.g. 3,3,3 (default: every party of dimension max degree).
    #[arg(long, value_parser = parse_shape)]
    pub shape: Option<SystemShape>,
    /// Target shape for the padding suite (default: every dimension + 1).
    #[arg(long, value_parser = parse_shape)]
    pub bigger: Option<SystemShape>,
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    /// States for the basis-rank suite (default: twice the dimension).
    #[arg(long)]
    pub num_states: Option<usize>,
    /// Tolerance override, e.g. --tol invariance=1e-9 (repeatable).
    #[arg(long, value_parser = parse_tol)]
    pub tol: Vec<(Suite, f64)>,
    /// Basis suite below the stable range: print observed ranks, assert nothing.
    #[arg(long)]
    pub diagnostic: bool,
    /// Also write the JSON report here.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

fn parse_shape(s: &str) -> Result<SystemShape, String> {
    let dims = s
        .split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|e| format!("bad dimension {d:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    SystemShape::new(dims).map_err(|e| e.to_string())
}

fn parse_tol(s: &str) -> Result<(Suite, f64), String> {
    let (name, value) = s.split_once('=').ok_or("expected SUITE=VALUE")?;
    let suite = Suite::from_str(name, true)?;
    let value = value.parse::<f64>().map_err(|e| e.to_string())?;
    Ok((suite, value))
}

/// Failure classes, each with its own exit status.
#[derive(Debug)]
pub enum Failure {
    /// A verification check did not pass.
    Check,
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Lib(Error::Inconsistency(_)) => 1,
            Failure::Lib(Error::BudgetExceeded { .. } | Error::Precondition(_) | Error::InvalidShape(_)) => 2,
            Failure::Lib(Error::Parse(_) | Error::InvalidPermutation { .. } | Error::InvalidTuple(_)) => 3,
            Failure::Lib(Error::ShapeMismatch(_) | Error::SizeMismatch { .. } | Error::ArityMismatch { .. }) => 4,
            Failure::Io(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.config.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global() {
            eprintln!("luinv: cannot configure {jobs} workers: {e}");
        }
    }
    let result = match cli.command {
        Command::Orbits { k, m, connected } => commands::orbits(&cli.config, k, m, connected),
        Command::Count { k, max_m } => commands::count(&cli.config, k, max_m),
        Command::Eval { state, orbit, kind } => commands::eval(&cli.config, &state, &orbit, kind.map(Into::into)),
        Command::Factor { orbit, kind } => commands::factor(&cli.config, &orbit, kind.map(Into::into)),
        Command::Verify(args) => commands::verify(&cli.config, &args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Check => eprintln!("luinv: verification failed"),
                Failure::Lib(e) => eprintln!("luinv: {e}"),
                Failure::Io(msg) => eprintln!("luinv: {msg}"),
            }
            ExitCode::from(f.exit_code())
        }
    }
}
