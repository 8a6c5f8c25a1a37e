use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use urllc_cli::{cmd_run, cmd_sweep, parse_grid, parse_seeds, CliError, OutputPaths};

/// URLLC slot scheduling simulator.
#[derive(Parser)]
#[command(name = "urllc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its trace and summary.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        summary: PathBuf,
    },
    /// Sweep ground-truth p against predictor p_hat for both schedulers.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated ground-truth values.
        #[arg(long)]
        p: String,
        /// Comma-separated predictor values.
        #[arg(long = "p-hat")]
        p_hat: String,
        /// Comma-separated seeds.
        #[arg(long)]
        seeds: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trace,
            summary,
        } => {
            let run = cmd_run(
                &config,
                seed,
                &OutputPaths {
                    trace_path: trace,
                    summary_path: summary,
                },
            )?;
            eprintln!(
                "{} frames: reliability {:.4}, eMBB efficiency {:.4}",
                run.summary.num_frames, run.summary.reliability_rate, run.summary.embb_efficiency
            );
        }
        Command::Sweep {
            config,
            p,
            p_hat,
            seeds,
            out,
        } => {
            let rows = cmd_sweep(
                &config,
                &parse_grid(&p)?,
                &parse_grid(&p_hat)?,
                &parse_seeds(&seeds)?,
                &out,
            )?;
            eprintln!("{} rows written to {}", rows.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
