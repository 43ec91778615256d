//! The `vps` command-line front end.
//!
//! Each subcommand returns a JSON report and an exit code: 0 on success, 1 when
//! a run aborted (the report carries the status), 2 for invalid or
//! non-divergence-free input and 3 for bad flags.

mod commands;
mod output;
mod problem;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::integrate::problems::ProblemParams;
use crate::integrate::Direction;
use crate::oracle::Stencil;
use crate::splitting::Order;

pub use commands::{cmd_decompose, cmd_integrate, cmd_order, cmd_poincare, cmd_verify, Report};
pub use output::{write_section_csv, write_trajectory_csv};
pub use problem::{parse_angle, parse_point, Point, Problem, SampleRegion};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Runtime(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Input(_) => 2,
            CliError::Runtime(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "vps",
    version,
    about = "Volume-preserving splitting integrators for divergence-free polynomial fields"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Split the field into elementary flows and shears
    Decompose(DecomposeArgs),
    /// Integrate one trajectory and write it as CSV
    Integrate(IntegrateArgs),
    /// Intersect trajectories with a coordinate plane
    Poincare(PoincareArgs),
    /// Check volume preservation, flow exactness and first integrals at random points
    Verify(VerifyArgs),
    /// Estimate the convergence order against a tight reference solution
    Order(OrderArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Split1,
    Split2,
    Rk45,
}

impl MethodArg {
    pub fn order(self) -> Option<Order> {
        match self {
            MethodArg::Split1 => Some(Order::First),
            MethodArg::Split2 => Some(Order::Second),
            MethodArg::Rk45 => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MethodArg::Split1 => "split1",
            MethodArg::Split2 => "split2",
            MethodArg::Rk45 => "rk45",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StencilArg {
    #[value(name = "2")]
    Two,
    #[value(name = "4")]
    Four,
}

impl From<StencilArg> for Stencil {
    fn from(s: StencilArg) -> Self {
        match s {
            StencilArg::Two => Stencil::TwoPoint,
            StencilArg::Four => Stencil::FourPoint,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct ProblemArgs {
    /// Built-in problem (quad_stokes, cubic_stokes, laurent) or path to a JSON problem file
    #[arg(long)]
    pub problem: String,
    /// Perturbation strength of quad_stokes
    #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
    pub epsilon: f64,
    /// Strain-rate ratio of cubic_stokes
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    /// Vorticity magnitude of cubic_stokes
    #[arg(long, default_value_t = 1.5, allow_negative_numbers = true)]
    pub wnorm: f64,
    /// Vorticity angle of cubic_stokes; accepts e.g. `0.275pi`
    #[arg(long, default_value = "0.275pi", value_parser = parse_angle, allow_negative_numbers = true)]
    pub theta: f64,
}

impl ProblemArgs {
    pub fn params(&self) -> ProblemParams {
        ProblemParams {
            epsilon: self.epsilon,
            alpha: self.alpha,
            w_norm: self.wnorm,
            theta: self.theta,
        }
    }

    pub fn resolve(&self) -> Result<Problem, CliError> {
        Problem::resolve(&self.problem, &self.params())
    }
}

#[derive(Clone, Debug, Args)]
pub struct RkArgs {
    /// Relative tolerance of rk45
    #[arg(long = "rel-tol", default_value_t = 1e-3)]
    pub rel_tol: f64,
    /// Absolute tolerance of rk45
    #[arg(long = "abs-tol", default_value_t = 1e-6)]
    pub abs_tol: f64,
}

#[derive(Clone, Debug, Args)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct IntegrateArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Split2)]
    pub method: MethodArg,
    /// Step size (initial step for rk45); defaults per problem
    #[arg(long)]
    pub h: Option<f64>,
    /// Integration horizon; defaults per problem
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Initial state as a comma list
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<Point>,
    /// Trajectory CSV; without it the CSV goes to stdout and the summary to stderr
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Keep every n-th state (default: at most one million rows)
    #[arg(long)]
    pub every: Option<usize>,
    /// Halve steps that would cross a blow-up time instead of aborting
    #[arg(long)]
    pub substep: bool,
    #[command(flatten)]
    pub rk: RkArgs,
    /// Accepted for uniformity; integration is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct PoincareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Split2)]
    pub method: MethodArg,
    /// Step size (initial step for rk45); defaults per problem
    #[arg(long)]
    pub h: Option<f64>,
    /// Integration horizon; defaults per problem
    #[arg(long = "T")]
    pub t_end: Option<f64>,
    /// Initial state; repeat for a sweep over several orbits
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Vec<Point>,
    /// Section axis, 1-based
    #[arg(long, default_value_t = 2)]
    pub axis: usize,
    /// Section level
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub level: f64,
    /// Crossing direction: +1, -1 or both
    #[arg(long, default_value = "both", allow_hyphen_values = true)]
    pub direction: Direction,
    /// Section CSV; without it the CSV goes to stdout and the summary to stderr
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Halve steps that would cross a blow-up time instead of aborting
    #[arg(long)]
    pub substep: bool,
    /// Accepted for uniformity; integration is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Clone, Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Split2)]
    pub method: MethodArg,
    /// Step size of the map under test; defaults per problem
    #[arg(long)]
    pub h: Option<f64>,
    /// Number of sample points
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Finite-difference perturbation
    #[arg(long, default_value_t = crate::oracle::DEFAULT_DELTA)]
    pub delta: f64,
    /// Central-difference stencil width
    #[arg(long, value_enum, default_value_t = StencilArg::Four)]
    pub stencil: StencilArg,
    /// Seed of the sample-point generator
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub rk: RkArgs,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[arg(long, value_enum, default_value_t = MethodArg::Split2)]
    pub method: MethodArg,
    /// Coarsest step; the study halves it `levels - 1` times
    #[arg(long)]
    pub h: Option<f64>,
    /// Integration horizon
    #[arg(long = "T", default_value_t = 1.0)]
    pub t_end: f64,
    /// Initial state as a comma list; defaults per problem
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<Point>,
    /// Number of step sizes
    #[arg(long, default_value_t = 4)]
    pub levels: usize,
    /// Tolerance of the reference rk45 solution
    #[arg(long = "ref-tol", default_value_t = 1e-12)]
    pub ref_tol: f64,
    /// Accepted for uniformity; the study is deterministic
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the report here instead of stdout
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (including the program name), runs the subcommand and returns
/// the process exit code. Reports go to `out`, diagnostics to stderr.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            log::debug!("command failed: {e:?}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::Decompose(a) => cmd_decompose(a)?.emit(a.output.as_deref(), out),
        Command::Integrate(a) => cmd_integrate(a, out),
        Command::Poincare(a) => cmd_poincare(a, out),
        Command::Verify(a) => cmd_verify(a)?.emit(a.output.as_deref(), out),
        Command::Order(a) => cmd_order(a)?.emit(a.output.as_deref(), out),
    }
}
