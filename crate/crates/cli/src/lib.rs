//! The `sparsecone` command-line tool.
//!
//! One binary with subcommands. Machine-readable results go to files (JSON,
//! CSV traces), a short summary goes to stdout, and the outcome is reported
//! through the exit code:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success, regular, converged |
//! | 1 | internal numerical failure |
//! | 2 | bad input or failed precondition |
//! | 3 | not regular |
//! | 4 | undecided |
//! | 5 | solver did not converge |

mod commands;
pub mod files;

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sparsecone::solvers::SolverMethod;
use sparsecone::tol::{set_zero_tol, ZERO_TOL_ENV};
use sparsecone::SolverConfig;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_NOT_REGULAR: u8 = 3;
pub const EXIT_UNDECIDED: u8 = 4;
pub const EXIT_NOT_CONVERGED: u8 = 5;

/// A command that could not complete, with the exit code to report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self { code: EXIT_INTERNAL, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<sparsecone::Error> for Failure {
    fn from(e: sparsecone::Error) -> Self {
        match e {
            sparsecone::Error::NumericalFailure { .. } => Failure::internal(e.to_string()),
            _ => Failure::usage(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "sparsecone",
    version,
    about = "Projections, normal cones, regularity and feasibility solvers for sparse and low-rank sets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Project a vector or symmetric matrix onto a set.
    Project(ProjectArgs),
    /// Test whether `y` lies in the normal cone of a set at `x̄`.
    ConeCheck(ConeCheckArgs),
    /// Certify strong regularity of a pair of sets at a point.
    Certify(CertifyArgs),
    /// Solve a two-set feasibility problem.
    Solve(SolveArgs),
    /// Write a planted sparse linear system.
    SparseGenerate(SparseGenerateArgs),
    /// Write a random EDM completion instance.
    EdmGenerate(EdmGenerateArgs),
    /// Complete a partial EDM and certify regularity.
    EdmComplete(EdmCompleteArgs),
    /// Run EDM completion on a sweep of random instances.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SetKind {
    /// nonnegative vectors with at most s nonzeros
    Ks,
    /// vectors with at most s nonzeros
    As,
    /// nonnegative orthant
    Nonneg,
    /// PSD matrices of rank at most s
    Ss,
    /// symmetric matrices of rank at most s
    Rs,
    /// PSD cone
    Psd,
}

impl SetKind {
    fn label(self) -> &'static str {
        match self {
            SetKind::Ks => "ks",
            SetKind::As => "as",
            SetKind::Nonneg => "nonneg",
            SetKind::Ss => "ss",
            SetKind::Rs => "rs",
            SetKind::Psd => "psd",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConeSet {
    Ks,
    Ss,
    Rs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CertifyMode {
    AffineKs,
    SpanSs,
    Edm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Dr,
    Map,
}

impl From<MethodArg> for SolverMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Dr => SolverMethod::Dr,
            MethodArg::Map => SolverMethod::Map,
        }
    }
}

#[derive(Debug, Args)]
pub struct ProjectArgs {
    /// JSON vector or matrix (array of rows)
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub set: SetKind,
    /// Sparsity or rank bound (required for ks, as, ss, rs)
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConeCheckArgs {
    /// JSON vector or matrix: the base point x̄
    #[arg(long)]
    pub point: PathBuf,
    /// JSON vector or matrix: the candidate normal y
    #[arg(long)]
    pub normal: PathBuf,
    #[arg(long, value_enum)]
    pub set: ConeSet,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum)]
    pub mode: CertifyMode,
    /// EDM mode: JSON matrix X̄ to certify at (defaults to the instance's ground truth)
    #[arg(long)]
    pub solution: Option<PathBuf>,
    /// Seed for sampled searches (required for affine-ks and span-ss)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Random starts or sampled subsets for falsification searches
    #[arg(long, default_value_t = 10_000)]
    pub starts: usize,
    /// Local steps per start
    #[arg(long, default_value_t = 200)]
    pub steps: usize,
    /// Largest dimension for exhaustive subset enumeration
    #[arg(long, default_value_t = 20)]
    pub max_enum_dim: usize,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "dr")]
    pub method: MethodArg,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 200)]
    pub stall_window: usize,
}

impl SolverArgs {
    pub fn config(&self) -> SolverConfig {
        SolverConfig { tol: self.tol, max_iter: self.max_iter, stall_window: self.stall_window }
    }
}

#[derive(Debug, Clone, Args)]
pub struct StartArgs {
    /// JSON vector or matrix to start from
    #[arg(long, conflicts_with = "perturb")]
    pub x0: Option<PathBuf>,
    /// Start at the instance's known solution plus a random perturbation of this Frobenius norm
    #[arg(long, requires = "seed")]
    pub perturb: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// JSON problem with a "kind" of sparse-linear, low-rank-psd or edm
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long)]
    pub output: PathBuf,
    /// CSV trace of the run
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SparseGenerateArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EdmGenerateArgs {
    #[arg(long)]
    pub points: usize,
    #[arg(long)]
    pub s: usize,
    /// Probability that each distance is known
    #[arg(long, default_value_t = 0.8)]
    pub fraction: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct EdmCompleteArgs {
    /// EDM instance JSON
    #[arg(long)]
    pub instance: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub start: StartArgs,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated numbers of points
    #[arg(long, value_delimiter = ',', default_value = "5,8,12")]
    pub points: Vec<usize>,
    /// Instances per size
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 2)]
    pub s: usize,
    #[arg(long, default_value_t = 0.8)]
    pub fraction: f64,
    /// Frobenius norm of the perturbation of the planted configuration
    #[arg(long, default_value_t = 0.01)]
    pub perturb: f64,
    /// Base seed; instance k of each size uses seed + k
    #[arg(long)]
    pub seed: u64,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub output: PathBuf,
}

/// Apply the zero-tolerance override from the environment, if set.
pub fn apply_env_tolerance() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(ZERO_TOL_ENV) else {
        return Ok(());
    };
    match raw.trim().parse::<f64>() {
        Ok(t) if t.is_finite() && t > 0.0 => {
            set_zero_tol(t);
            Ok(())
        }
        _ => Err(Failure::usage(format!("{ZERO_TOL_ENV} must be a positive number, got {raw:?}"))),
    }
}

/// Run one command; returns the exit code on completion.
pub fn run(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Project(a) => commands::project(&a),
        Command::ConeCheck(a) => commands::cone_check(&a),
        Command::Certify(a) => commands::certify(&a),
        Command::Solve(a) => commands::solve(&a),
        Command::SparseGenerate(a) => commands::sparse_generate(&a),
        Command::EdmGenerate(a) => commands::edm_generate(&a),
        Command::EdmComplete(a) => commands::edm_complete(&a),
        Command::Bench(a) => commands::bench(&a),
    }
}
