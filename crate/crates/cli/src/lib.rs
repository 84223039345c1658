//! Command-line driver for pdls: degradation, restoration and benchmark
//! runs with CSV, PGM and SVG output.

pub mod commands;
pub mod config;
pub mod dataset;
pub mod error;
pub mod manifest;
pub mod mixture_file;
pub mod pgm;
pub mod plot;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigArgs, ExperimentSpec};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "pdls", version, about = "Prompt-guided dual latent steering on exact flow fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Degrade dataset inputs and write observations plus manifest.csv.
    Degrade {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Restore a manifest (or toy2d seeds) and write metrics and diagnostics.
    Restore {
        #[command(flatten)]
        config: ConfigArgs,
        /// manifest.csv written by `degrade`; optional for toy2d.
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for seed-level parallelism.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Aggregate restore runs into summary.csv and plots.
    Bench {
        /// Restore output directories.
        #[arg(long, num_args = 1.., required = true)]
        runs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// End-to-end toy and shapes runs with a benchmark table.
    Demo {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

/// Executes one subcommand, returning the text to print on success.
pub fn run(cli: Cli) -> Result<String> {
    match cli.command {
        Command::Degrade { config, out } => {
            let spec = config.resolve()?;
            let rows = commands::degrade(&spec, &out)?;
            Ok(format!(
                "wrote {} observations and {}",
                rows.len(),
                out.join(manifest::MANIFEST_FILE).display()
            ))
        }
        Command::Restore {
            config,
            manifest,
            out,
            jobs,
        } => {
            let spec = config.resolve()?;
            let rows = commands::restore_run(&spec, manifest.as_deref(), &out, jobs)?;
            Ok(format!(
                "restored {} inputs into {}",
                rows.len(),
                out.join(commands::METRICS_FILE).display()
            ))
        }
        Command::Bench { runs, out } => {
            let result = commands::bench(&runs, &out)?;
            Ok(commands::format_table(&result.table))
        }
        Command::Demo { out, jobs } => {
            let result = commands::demo(&out, jobs)?;
            Ok(commands::format_table(&result.table))
        }
    }
}
