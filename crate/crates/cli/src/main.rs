//! `ptscatter`: scattering coefficients, sweeps, feature loci, relation
//! checks and wavepacket runs for PT-symmetric rhombic rings or any centre
//! given as JSON.
//!
//! Exit codes: 0 ok, 1 verification failure, 2 singular point, 64 usage.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_VERIFY: u8 = 1;
pub const EXIT_SINGULAR: u8 = 2;
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug, Parser)]
#[command(name = "ptscatter", version, about = "Scattering off non-Hermitian tight-binding centres with synthetic flux")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients and relation residuals at one wave vector.
    Solve(SolveArgs),
    /// Probabilities over a parameter grid.
    Sweep(SweepArgs),
    /// Transmission zeros (axial) or reflection zeros (reflection).
    Zeros(ZerosArgs),
    /// Spectral singularities of the axial ring.
    Singularities(SingularityArgs),
    /// Randomised PT relation suite.
    Verify(VerifyArgs),
    /// Wavepacket oracle against the steady-state solver.
    Wavepacket(WavepacketArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Axial,
    Reflection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Built-in rhombic ring.
    #[arg(long, value_enum, conflicts_with = "center", required_unless_present = "center")]
    pub model: Option<Model>,
    /// Centre definition file (JSON) instead of a built-in ring.
    #[arg(long, value_name = "PATH")]
    pub center: Option<PathBuf>,
    /// Flux Phi in radians.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "flux_pi")]
    pub flux: Option<f64>,
    /// Flux as a multiple of pi.
    #[arg(long, allow_hyphen_values = true)]
    pub flux_pi: Option<f64>,
    /// Gain/loss strength gamma.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long, short, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Wave vector in (0, pi).
    #[arg(long, required = true)]
    pub k: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Swept axes, outermost first: `phi,k`, `gamma,k`, `phi,gamma`, `k`, ...
    #[arg(long, default_value = "phi,k")]
    pub axes: String,
    /// Points per axis, e.g. `101x101` or `201`.
    #[arg(long, default_value = "101x101")]
    pub grid: String,
    /// Wave vector when k is not swept.
    #[arg(long)]
    pub k: Option<f64>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ZerosArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Scan points for centre files.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SingularityArgs {
    #[arg(long, value_enum, default_value = "axial")]
    pub model: Model,
    /// Fixed flux in radians (scanned over [0, 2pi] when absent).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "flux_pi")]
    pub flux: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub flux_pi: Option<f64>,
    /// Fixed gamma (scanned over [-3, 3] when absent).
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Fixed wave vector (scanned over (0, pi) when absent).
    #[arg(long)]
    pub k: Option<f64>,
    /// Seed points per scanned axis.
    #[arg(long, default_value = "51")]
    pub grid: String,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Gamma is drawn from [-gamma_max, gamma_max] when --gamma is absent.
    #[arg(long, default_value_t = 2.0)]
    pub gamma_max: f64,
    /// Residual threshold for every relation.
    #[arg(long, default_value_t = 1e-10)]
    pub tolerance: f64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct WavepacketArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Carrier wave vector.
    #[arg(long, required = true)]
    pub k: f64,
    #[arg(long, default_value_t = 15.0)]
    pub sigma: f64,
    /// Lead sites per side.
    #[arg(long, default_value_t = 400)]
    pub n: usize,
    #[arg(long, default_value_t = 0.02)]
    pub dt: f64,
    #[arg(long, default_value_t = ptscatter::wavepacket::DEFAULT_TOLERANCE)]
    pub tol: f64,
    /// Write the norm trace `t,norm,R_region,T_region` here.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
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
    let result = match cli.command {
        Command::Solve(a) => commands::solve(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Zeros(a) => commands::zeros(&a),
        Command::Singularities(a) => commands::singularities(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Wavepacket(a) => commands::wavepacket(&a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
