mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use pursuit_core::PursuitError;

/// Sparse decompositions over Mexican-hat wavelet dictionaries with forward
/// and backward optimized orthogonal matching pursuit.
#[derive(Debug, Parser)]
#[command(name = "pursuit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a Mexican-hat dictionary as CSV plus a JSON sidecar.
    GenDict(GenDictArgs),
    /// Write a linear chirp as a `t,value` CSV.
    GenSignal(GenSignalArgs),
    /// Run the forward pursuit on a signal.
    Decompose(DecomposeArgs),
    /// Shrink a stored decomposition with the backward pursuit.
    Shrink(ShrinkArgs),
    /// Run the chirp experiment end to end: forward 60, backward to 34, and
    /// forward 34 as a baseline.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Directory for generated files.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
    /// Reserved; the pipeline is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenDictArgs {
    /// Scale indices, `a..b` (inclusive) or a comma list.
    #[arg(long)]
    pub scales: String,
    /// Translation step in the dilated coordinate.
    #[arg(long)]
    pub step: f64,
    /// `t_min,t_max`
    #[arg(long)]
    pub interval: String,
    /// Sampling step in seconds.
    #[arg(long)]
    pub grid: f64,
    /// Extra translation indices on each side of the interval.
    #[arg(long, default_value_t = 4)]
    pub margin: i64,
    #[arg(long, default_value = "dictionary.csv")]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GenSignalArgs {
    /// `f0,t1,f1`
    #[arg(long)]
    pub chirp: String,
    /// `start,step,end`
    #[arg(long)]
    pub grid: String,
    #[arg(long, default_value = "signal.csv")]
    pub output: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub max_atoms: usize,
    /// Stop once the residual norm is at or below this value.
    #[arg(long, default_value_t = 0.0)]
    pub tol: f64,
    #[arg(long, default_value_t = pursuit_core::DEFAULT_DEPENDENCE_EPS)]
    pub dependence_eps: f64,
    /// Score candidates by full re-orthogonalization instead of running
    /// projections.
    #[arg(long)]
    pub from_scratch: bool,
    /// Check invariants against the least-squares reference at every step.
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CriterionArg {
    /// Least residual growth, `|c_j|² / ‖β_j‖²`.
    MinResidual,
    /// Smallest `|c_j|`.
    NaiveAbsCoeff,
}

#[derive(Debug, Args)]
pub struct ShrinkArgs {
    /// Decomposition artifact written by `decompose`.
    #[arg(long)]
    pub artifact: PathBuf,
    #[arg(long)]
    pub signal: PathBuf,
    #[arg(long)]
    pub dict: PathBuf,
    #[arg(long)]
    pub target_count: Option<usize>,
    #[arg(long)]
    pub error_budget: Option<f64>,
    #[arg(long, value_enum, default_value_t = CriterionArg::MinResidual)]
    pub criterion: CriterionArg,
    #[arg(long)]
    pub verify: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReproduceArgs {
    /// Forward atom count before shrinking.
    #[arg(long, default_value_t = 60)]
    pub max_atoms: usize,
    /// Atom count after shrinking, also used for the forward baseline.
    #[arg(long, default_value_t = 34)]
    pub target_count: usize,
    #[arg(long)]
    pub verify: bool,
    /// Write report and series files; nothing is written without it.
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure categories, each with its own exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core {
        stage: &'static str,
        source: PursuitError,
    },
    Verification(String),
}

impl CliError {
    pub fn at(stage: &'static str) -> impl FnOnce(PursuitError) -> CliError {
        move |source| CliError::Core { stage, source }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core { source, .. } if source.is_numerical() => 4,
            CliError::Core {
                source: PursuitError::InvalidConfig(_) | PursuitError::EmptySpec(_),
                ..
            } => 2,
            CliError::Core { .. } => 3,
            CliError::Verification(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Core { stage, source } => write!(f, "{stage} failed: {source}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::GenDict(a) => commands::gen_dict(&a),
        Command::GenSignal(a) => commands::gen_signal(&a),
        Command::Decompose(a) => commands::decompose(&a),
        Command::Shrink(a) => commands::shrink(&a),
        Command::Reproduce(a) => commands::reproduce(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
