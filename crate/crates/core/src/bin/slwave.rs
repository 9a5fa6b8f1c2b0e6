use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use slwave::config::{OutputFormat, RunConfig};
use slwave::pipeline::{exit_code, run_eigs, run_model, run_recover, run_simulate, run_verify};

#[derive(Parser)]
#[command(name = "slwave", version, about = "Boundary-control wave model for -u'' + qu on an interval")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory (overrides `[output] dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table format (overrides `[output] format`).
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    /// Seed for random probes (overrides `[numerics] seed`).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Dirichlet eigenvalues, eigenfunctions and the lower bound.
    Eigs,
    /// Boundary-controlled waves with support and oracle reports.
    Simulate,
    /// Gauge data and model coefficients.
    Model,
    /// The acceptance suite.
    Verify,
    /// Potential branches from the model coefficients.
    Recover,
}

fn load(cli: &Cli) -> slwave::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out {
        cfg.output.dir = dir.clone();
    }
    if let Some(format) = cli.format {
        cfg.output.format = format;
    }
    if let Some(seed) = cli.seed {
        cfg.numerics.seed = seed;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load(&cli).and_then(|cfg| match cli.command {
        Command::Eigs => run_eigs(&cfg),
        Command::Simulate => run_simulate(&cfg),
        Command::Model => run_model(&cfg),
        Command::Verify => run_verify(&cfg),
        Command::Recover => run_recover(&cfg),
    });
    match &result {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if outcome.exit_code != 0 {
                eprintln!("slwave: verification failed");
            }
        }
        Err(e) => eprintln!("slwave: {e}"),
    }
    ExitCode::from(exit_code(&result) as u8)
}
