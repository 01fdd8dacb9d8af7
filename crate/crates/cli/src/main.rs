//! `veldrift`: config-driven runner for the velocity-diffusion and
//! estimation experiments in the core crate.
//!
//! Exit status is nonzero exactly when an error was reported; all
//! diagnostics go to stderr, machine-readable output to stdout.

mod config;
mod output;
mod runner;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};

use config::{parse_config, ExperimentKind};

#[derive(Parser)]
#[command(name = "veldrift", version, about = "Velocity-diffusion experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file
    Run {
        /// Path to the TOML config
        config: PathBuf,
        /// Override the config's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the config's output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the available experiments
    ListExperiments,
    /// Parse a config file and report every problem found
    Validate {
        /// Path to the TOML config
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, seed, out } => run(&config, seed, out),
        Command::ListExperiments => {
            list_experiments();
            Ok(())
        }
        Command::Validate { config } => validate(&config),
    }
}

fn load_config(path: &PathBuf) -> Result<config::ExperimentConfig> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    parse_config(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn run(path: &PathBuf, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut config = load_config(path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(out) = out {
        config.output_dir = Some(out);
    }
    let out_dir = config.output_dir.clone().ok_or_else(|| {
        anyhow!("no output directory: set `output_dir` in the config or pass --out")
    })?;
    fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let record = runner::run(&config, &out_dir)?;
    for file in &record.files {
        eprintln!("wrote {}", record.output_dir.join(file).display());
    }
    // The summary is the machine-readable result; stdout carries only it.
    print!("{}", record.summary_text);
    Ok(())
}

fn list_experiments() {
    println!("available experiments:");
    for kind in ExperimentKind::ALL {
        println!("  {:<20} {}", kind.name(), kind.description());
    }
    println!("\nsee README.md for the parameter set each experiment accepts");
}

fn validate(path: &PathBuf) -> Result<()> {
    let config = load_config(path)?;
    println!("OK: valid `{}` config", config.experiment.name());
    Ok(())
}
