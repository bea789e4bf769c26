//! `nematic`: coefficient tables, branch diagrams, GCI profiles, homogeneous
//! kinetic runs and the verification suite.

mod commands;
mod config;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use table::Format;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or parameters (exit 2).
    Usage(String),
    /// A numeric routine failed (exit 3).
    Numeric(String),
    /// Output was produced but a check failed (exit 1).
    Verification(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numeric(m) => write!(f, "numeric error: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<nematic::Error> for CliError {
    fn from(e: nematic::Error) -> Self {
        match e {
            nematic::Error::InvalidParameter(_) | nematic::Error::LambdaZero => CliError::Usage(e.to_string()),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "nematic", version, about = "Ericksen-Leslie coefficients from the Doi kinetic model")]
struct Cli {
    /// INI file; keys use the flag names, in a section per command or in the general section.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct ModelArgs {
    /// Space dimension.
    #[arg(long = "n")]
    pub n: Option<usize>,
    /// Maier-Saupe interaction strength.
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    /// Shape parameter, in [-1, 1].
    #[arg(long = "Lambda", allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Polymer viscous coefficient
    #[arg(long, allow_negative_numbers = true)]
    pub zeta: Option<f64>,
    /// Nonlocality moment of the interaction kernel.
    #[arg(long, allow_negative_numbers = true)]
    pub beta: Option<f64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct OutputArgs {
    /// Output path (stdout when omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json.
    #[arg(long)]
    pub format: Option<Format>,
    /// Seed for random initial states and sampled checks
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Args, Debug, Clone, Default)]
pub struct GridArgs {
    #[arg(long = "eta-min")]
    pub eta_min: Option<f64>,
    #[arg(long = "eta-max")]
    pub eta_max: Option<f64>,
    /// Number of grid points.
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct CoeffsArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Sweep the density on [rho-min, rho-max] instead of the concentration.
    #[arg(long = "rho-min")]
    pub rho_min: Option<f64>,
    #[arg(long = "rho-max")]
    pub rho_max: Option<f64>,
    /// Debug: substitute S2 = S4 = 0 into the coefficient formulas.
    #[arg(long)]
    pub isotropic: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct BranchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Path of the JSON summary (default: next to --out).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct GciArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated concentrations; overrides the grid.
    #[arg(long, value_delimiter = ',')]
    pub eta: Option<Vec<f64>>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of profile samples on [-1, 1].
    #[arg(long = "r-points")]
    pub r_points: Option<usize>,
    /// Size of the polynomial basis.
    #[arg(long)]
    pub basis: Option<usize>,
    /// Path of the summary table (default: next to --out).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Deborah number.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Shear rate of u = (rate * y, 0).
    #[arg(long, allow_negative_numbers = true)]
    pub shear: Option<f64>,
    /// Fourier truncation order.
    #[arg(long = "K")]
    pub k: Option<usize>,
    /// Time step (default min(eps/40, 1e-3))
    #[arg(long)]
    pub dt: Option<f64>,
    /// Final time
    #[arg(long)]
    pub tmax: Option<f64>,
    /// Spacing of output rows.
    #[arg(long)]
    pub interval: Option<f64>,
    /// etd2 or etd4.
    #[arg(long)]
    pub integrator: Option<String>,
    /// Density of the initial state.
    #[arg(long)]
    pub rho: Option<f64>,
    /// random, gibbs or uniform.
    #[arg(long)]
    pub init: Option<String>,
    /// Director angle of a gibbs initial state.
    #[arg(long, allow_negative_numbers = true)]
    pub theta0: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Debug: added to alpha6 before the Parodi check.
    #[arg(long = "parodi-perturbation", allow_negative_numbers = true)]
    pub parodi_perturbation: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Leslie coefficient table along the stable branch.
    Coeffs(CoeffsArgs),
    /// Bifurcation diagram rho(lambda) with stability marking.
    Branch(BranchArgs),
    /// GCI profiles and the derived constants.
    Gci(GciArgs),
    /// Homogeneous kinetic run in two dimensions.
    Simulate(SimulateArgs),
    /// Runs every numerical check and writes a JSON report.
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = cli.config.as_deref();
    let result = match cli.command {
        Command::Coeffs(a) => commands::coeffs(&a, cfg),
        Command::Branch(a) => commands::branch(&a, cfg),
        Command::Gci(a) => commands::gci(&a, cfg),
        Command::Simulate(a) => commands::simulate(&a, cfg),
        Command::Verify(a) => commands::verify(&a, cfg),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nematic: {e}");
            ExitCode::from(e.code())
        }
    }
}
