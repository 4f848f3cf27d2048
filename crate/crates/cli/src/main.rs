use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Throughput models and simulator for non-primary channel access.
#[derive(Debug, Parser)]
#[command(name = "npca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form throughput factors, ratio and crossover.
    Analytic(AnalyticArgs),
    /// One simulation run; writes a metrics row and a manifest.
    Simulate(SimulateArgs),
    /// Replicated occupancy sweeps or the simulator-vs-model grid.
    Sweep(SweepArgs),
    /// Legacy, NPCA and hybrid over randomly drawn occupancy periods.
    HybridExperiment(HybridArgs),
}

#[derive(Debug, Args)]
struct AnalyticArgs {
    #[arg(long, default_value_t = 0.5)]
    p1: f64,
    #[arg(long, default_value_t = 0.5)]
    p2: f64,
    /// Overhead factor(s), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2.0")]
    l: Vec<f64>,
    /// Grid `lo:hi:step` swept over both p1 and p2 instead of one point.
    #[arg(long)]
    sweep: Option<String>,
    /// Directory for analytic.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    Legacy,
    Npca,
    Hybrid,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Config file (flat TOML); defaults to the standard parameter set.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    policy: Option<PolicyArg>,
    #[arg(long)]
    p1: Option<f64>,
    #[arg(long)]
    p2: Option<f64>,
    #[arg(long)]
    l: Option<f64>,
    /// Simulated seconds.
    #[arg(long)]
    time: Option<f64>,
    #[arg(long)]
    thre1: Option<f64>,
    #[arg(long)]
    k1: Option<u64>,
    #[arg(long, env = "NPCA_OUT_DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScenarioArg {
    A,
    B,
    C,
    Validation,
    RandomOccupancy,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioArg,
    /// Replications per grid point.
    #[arg(long, default_value_t = 5)]
    seeds: u32,
    /// Seed of the first replication.
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated seconds per run.
    #[arg(long, default_value_t = 10.0)]
    time: f64,
    #[arg(long, value_delimiter = ',')]
    l: Option<Vec<f64>>,
    /// Grid increment (defaults: 0.02 for a/b, 0.05 for c).
    #[arg(long)]
    step: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "NPCA_OUT_DIR", default_value = "results")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct HybridArgs {
    /// Independent repetitions of the whole experiment.
    #[arg(long, default_value_t = 5)]
    seeds: u32,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 200)]
    periods: u32,
    /// Period length in seconds.
    #[arg(long, default_value_t = 1.0)]
    period: f64,
    #[arg(long, default_value_t = 2.2)]
    l: f64,
    #[arg(long)]
    thre1: Option<f64>,
    #[arg(long)]
    k1: Option<u64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, env = "NPCA_OUT_DIR", default_value = "results")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analytic(a) => commands::analytic(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::HybridExperiment(a) => commands::hybrid_experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

impl PolicyArg {
    fn name(self) -> &'static str {
        match self {
            PolicyArg::Legacy => "legacy",
            PolicyArg::Npca => "npca",
            PolicyArg::Hybrid => "hybrid",
        }
    }
}
