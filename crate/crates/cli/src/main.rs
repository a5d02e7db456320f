//! `crossover`: verification suites, susceptibilities, sub-criticality
//! curves and Monte Carlo scans for the anisotropic Ising model.
//!
//! Exit codes: 0 when everything passes, 1 when a check fails, 2 for usage
//! or validation errors.

mod commands;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "crossover", version, about = "Sub-criticality bounds for the anisotropic Ising model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate the bound tanh(J_s) < 1/(2 s chi_d(J_d)) over a J_d grid.
    Curve(CurveArgs),
    /// Finite-volume or closed-form susceptibility, optionally by several methods.
    Chi(ChiArgs),
    /// Monte Carlo estimate of <M^2>/|Lambda| on a torus, or a scan below the curve.
    Mc(McArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum ScopeArg {
    Identities,
    Backbone,
    Properties,
    Chain,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    pub scope: ScopeArg,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Edge budget for randomized graphs.
    #[arg(long, default_value_t = 20)]
    pub max_edges: usize,
    #[arg(long, default_value_t = 200)]
    pub random_graphs: usize,
    #[arg(long, default_value_t = 100)]
    pub random_instances: usize,
    /// Restrict to one fixed instance (single-edge, path-4, tree-6, four-cycle, grid-3x3, box-1+1-N1).
    #[arg(long)]
    pub instance: Option<String>,
    /// JSON report path.
    #[arg(long)]
    pub report: Option<std::path::PathBuf>,
    /// Print every record, not only failures and the summary.
    #[arg(long)]
    pub verbose: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EstimatorArg {
    Exact1d,
    Enumeration,
    Strip,
    Extrapolated,
}

#[derive(Args, Debug)]
pub struct CurveArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub jd_min: f64,
    #[arg(long)]
    pub jd_max: f64,
    #[arg(long)]
    pub step: f64,
    #[arg(long, value_enum)]
    pub estimator: EstimatorArg,
    /// Box half-side for the enumeration estimator.
    #[arg(long, default_value_t = 3)]
    pub n: usize,
    /// Strip width for the strip estimator.
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Strip length for the strip estimator.
    #[arg(long, default_value_t = 64)]
    pub length: usize,
    /// Square box sides for the extrapolated estimator.
    #[arg(long, value_delimiter = ',', default_value = "6,8,10")]
    pub widths: Vec<usize>,
    /// CSV output path (a manifest is written alongside).
    #[arg(long)]
    pub out: std::path::PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Spin,
    Currents,
    Transfer,
    ClosedForm,
}

#[derive(Args, Debug)]
pub struct ChiArgs {
    #[arg(long)]
    pub d: usize,
    /// Cubic box [-N, N]^d.
    #[arg(long, conflicts_with_all = ["width", "length"])]
    pub n: Option<usize>,
    /// Rectangular d = 2 strip width.
    #[arg(long, requires = "length")]
    pub width: Option<usize>,
    #[arg(long, requires = "width")]
    pub length: Option<usize>,
    #[arg(long)]
    pub j_d: f64,
    /// One or more methods; values from several finite-volume methods must agree.
    #[arg(long, value_enum, value_delimiter = ',', required = true)]
    pub method: Vec<MethodArg>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SamplerArg {
    Metropolis,
    Wolff,
}

#[derive(Args, Debug)]
pub struct McArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub s: usize,
    /// Torus side.
    #[arg(long, default_value_t = 4)]
    pub l: usize,
    #[arg(long, default_value_t = 0.0)]
    pub j_d: f64,
    #[arg(long, default_value_t = 0.0)]
    pub j_s: f64,
    #[arg(long, default_value_t = 2200)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 200)]
    pub burn_in: usize,
    #[arg(long, default_value_t = 16)]
    pub chains: usize,
    /// Master seed (required for reproducibility).
    #[arg(long)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "wolff")]
    pub sampler: SamplerArg,
    /// Compare against exact enumeration of the torus (|Lambda| within the spin cap).
    #[arg(long)]
    pub exact: bool,
    /// Scan J_s = (1 - margin) * bound for these J_d values instead of a single run.
    #[arg(long, value_delimiter = ',')]
    pub scan_jd: Vec<f64>,
    #[arg(long, default_value_t = 0.2)]
    pub margin: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32")]
    pub ls: Vec<usize>,
    /// Estimator for the scanned curve.
    #[arg(long, value_enum, default_value = "exact1d")]
    pub estimator: EstimatorArg,
    /// Output file (JSON for a single run, CSV for a scan); a manifest is written alongside.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => commands::verify(a),
        Command::Curve(a) => commands::curve(a),
        Command::Chi(a) => commands::chi(a),
        Command::Mc(a) => commands::mc(a),
    };
    match outcome {
        Ok(commands::Status::Pass) => ExitCode::SUCCESS,
        Ok(commands::Status::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
