//! `robustfit` command-line runner.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "robustfit", version, about = "Robust regression experiments: SARM/TSSARM and baselines")]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand. Each one overrides the matching field
/// of the `--config` document.
#[derive(Debug, Args, Clone, Default)]
pub struct GlobalOpts {
    /// JSON config document for the subcommand.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Base seed; repetition r uses seed + r.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Repetitions per cell.
    #[arg(long, global = true, value_name = "K")]
    pub reps: Option<usize>,
    /// Comma-separated method list, e.g. mlr,arosi,sarm.
    #[arg(long, global = true, value_name = "LIST")]
    pub methods: Option<String>,
    /// Output directory (file path for `trace`).
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism. Falls back to the config,
    /// then to ROBUSTFIT_THREADS.
    #[arg(long, global = true, value_name = "K")]
    pub parallel: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Monte Carlo grid over synthetic scenarios.
    Simulate(SimulateArgs),
    /// Load-forecasting pipeline with optional training-data attack.
    Forecast(ForecastArgs),
    /// Single SARM/TSSARM fit with a per-iteration trace CSV.
    Trace(TraceArgs),
    /// Per-iteration wall time as m grows.
    Timing(TimingArgs),
    /// Descent, step-bound, gradient and prox checks as a JSON report.
    Verify(VerifyArgs),
}

/// One synthetic scenario, either from flags or from a spec file.
#[derive(Debug, Args, Clone)]
pub struct ScenarioArgs {
    /// Scenario type 1-6.
    #[arg(long = "type", default_value = "1", value_name = "T")]
    pub type_id: String,
    /// Columns of X.
    #[arg(long, default_value_t = 16)]
    pub n: usize,
    /// Rows; defaults per scenario type.
    #[arg(long)]
    pub m: Option<usize>,
    /// Corruption fraction.
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Outlier scale for Type 5.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// SimSpec as `key = value` lines or JSON; replaces the scenario flags.
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SpecFormat {
    Kv,
    Json,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Corruption grid, e.g. 0.1,0.2,0.3; defaults to --p.
    #[arg(long, value_name = "LIST")]
    pub p_grid: Option<String>,
    /// δ = factor · σ².
    #[arg(long)]
    pub delta_factor: Option<f64>,
    /// Print the expanded SimSpecs and exit.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long, value_enum, default_value = "kv")]
    pub format: SpecFormat,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    /// CSV with header timestamp,load,temperature. Without it a synthetic
    /// series is generated.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Years of synthetic data when no input is given.
    #[arg(long)]
    pub years: Option<u32>,
    /// Leading share of rows used for training.
    #[arg(long)]
    pub train_fraction: Option<f64>,
    /// pos_uniform, pos_gaussian or neg_uniform.
    #[arg(long)]
    pub attack: Option<String>,
    /// Percent of training rows attacked.
    #[arg(long)]
    pub fraction: Option<f64>,
    /// Magnitude parameters in percent: a,b or mu,sigma.
    #[arg(long, value_name = "A,B")]
    pub params: Option<String>,
    /// δ = factor · σ̂² with σ̂ from MLR training residuals; defaults to 6.
    #[arg(long)]
    pub delta_factor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// sarm or tssarm.
    #[arg(long, default_value = "sarm")]
    pub method: String,
    /// δ = factor · σ²; defaults to 6.
    #[arg(long)]
    pub delta_factor: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TimingArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Row multipliers applied to m.
    #[arg(long, default_value = "1,2,4", value_name = "LIST")]
    pub scales: String,
    /// Runs per scale; the fastest counts.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Skip scales whose working set exceeds this many bytes.
    #[arg(long)]
    pub memory_budget: Option<usize>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Random instances for the gradient check.
    #[arg(long, default_value_t = 100)]
    pub fd_instances: usize,
    /// Random (r, δ) pairs for the prox check.
    #[arg(long, default_value_t = 10_000)]
    pub prox_samples: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let g = &cli.global;
    let result = match &cli.command {
        Command::Simulate(a) => commands::simulate(g, a),
        Command::Forecast(a) => commands::forecast(g, a),
        Command::Trace(a) => commands::trace(g, a),
        Command::Timing(a) => commands::timing(g, a),
        Command::Verify(a) => commands::verify(g, a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
