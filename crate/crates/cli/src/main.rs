use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use taxelsim_cli::{commands, CliError, Overrides, RunConfig};

/// Simulated piezoresistive tactile sensing and object recognition.
#[derive(Parser)]
#[command(name = "taxelsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Random seed; falls back to TAXELSIM_SEED, then the configuration.
    #[arg(long, global = true, env = "TAXELSIM_SEED")]
    seed: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for leave-one-out folds.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Hyperparameter grid file (TOML).
    #[arg(long, global = true)]
    grid: Option<PathBuf>,

    /// Existing dataset file instead of generating one.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write sensor characteristic curves and a hysteresis loop.
    Curves,
    /// Simulate the grasp protocol and write the dataset.
    Generate,
    /// Compare classifiers per modality and run the resolution sweep.
    Evaluate,
    /// Run only the resolution sweep.
    Sweep,
    /// Fit one model on the whole dataset and save it.
    Train,
}

fn run(cli: Cli) -> Result<commands::Outcome, CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out,
        jobs: cli.jobs,
        grid: cli.grid,
        dataset: cli.dataset,
    };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Curves => commands::curves(&cfg),
        Command::Generate => commands::generate(&cfg),
        Command::Evaluate => commands::evaluate(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Train => commands::train(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(outcome) => {
            print!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
