//! Command-line front end: run, oracle, sweep, and validate subcommands.
//!
//! Exit codes: 0 on success, 2 on configuration or validation failure, 3 on
//! divergence, 1 on any other error.

use bnesim::runner;
use bnesim_core::CoreError;
use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "bnesim",
    about = "Distributed Bayesian Nash equilibrium seeking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Solve only the centralized discretized equilibrium.
    Oracle { config: PathBuf },
    /// Run the config once per combination of swept parameters.
    Sweep {
        config: PathBuf,
        /// Axis list such as "N=10,20,40;rho=0.5,1.0".
        #[arg(long)]
        vary: String,
    },
    /// Check the config, game structure, and schedule without running.
    Validate { config: PathBuf },
}

fn exit_code_for(err: &CoreError) -> u8 {
    match err {
        CoreError::Divergence { .. } => 3,
        CoreError::Config(_) | CoreError::AssumptionViolation(_) | CoreError::Domain(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<(), CoreError> {
    match cli.command {
        Command::Run { config } => {
            let cfg = runner::load_config(&config)?;
            let artifacts = runner::run(&cfg)?;
            let s = &artifacts.summary;
            println!(
                "done: {} ticks ({} windows), consensus [{:.3e}, {:.3e}], \
                 oracle distance {:.3e}, {} bytes; outputs in {}",
                s.ticks,
                s.windows,
                s.final_consensus[0],
                s.final_consensus[1],
                s.final_oracle_dist,
                s.bytes,
                cfg.outputs.dir.display()
            );
            Ok(())
        }
        Command::Oracle { config } => {
            let cfg = runner::load_config(&config)?;
            let sol = runner::run_oracle(&cfg)?;
            println!(
                "oracle: gap {:.3e} after {} iterations; strategies in {}",
                sol.gap,
                sol.iterations,
                cfg.outputs.dir.join("oracle.csv").display()
            );
            Ok(())
        }
        Command::Sweep { config, vary } => {
            let cfg = runner::load_config(&config)?;
            let results = runner::sweep(&cfg, &vary)?;
            for (label, artifacts) in &results {
                println!(
                    "{label}: oracle distance {:.3e}, {} bytes",
                    artifacts.summary.final_oracle_dist, artifacts.summary.bytes
                );
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = runner::load_config(&config)?;
            let report = runner::validate(&cfg)?;
            println!("{report}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
