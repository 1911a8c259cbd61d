use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jante::commands::{self, CommandError, Overrides, EXIT_CONFIG};
use jante::RunConfig;

#[derive(Parser)]
#[command(name = "jante", version, about = "Simulate and verify Jante's law processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of runs; overrides `n_runs`.
    #[arg(long, global = true)]
    runs: Option<usize>,
    /// Output directory; overrides `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (default: available parallelism).
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// One trajectory: trajectory.csv and summary.json.
    Simulate,
    /// Many trajectories: ensemble.csv, tau_hist.csv, drift.csv, summary.json.
    Ensemble,
    /// Ensemble plus one-sided bound checks; exit code 1 on failure.
    Verify,
    /// Removal-class grid of the initial configuration (d = 2): keepmap.csv.
    Keepmap,
    /// Theory constants as JSON on stdout.
    Constants,
    /// Exodus-time statistics: exodus.json and tau_hist.csv.
    Exodus,
}

fn run(cli: &Cli) -> Result<commands::Outcome, CommandError> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| jante::ConfigError::Invalid("--config is required".into()))?;
    let overrides = Overrides {
        seed: cli.seed,
        runs: cli.runs,
        out: cli.out.clone(),
        workers: cli.workers,
    };
    let cfg = overrides.apply(RunConfig::load(path)?);
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Ensemble => commands::ensemble(&cfg, cli.workers),
        Command::Verify => commands::verify(&cfg, cli.workers),
        Command::Keepmap => commands::keepmap(&cfg),
        Command::Constants => commands::constants(&cfg),
        Command::Exodus => commands::exodus(&cfg, cli.workers),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_CONFIG } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.message);
            ExitCode::from(outcome.exit_code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
