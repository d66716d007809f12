//! Subcommand definitions and dispatch. Every command reads the same
//! configuration file; a handful of flags override individual settings.

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, ModelKind, Task};
use crate::error::Result;
use crate::io::Provenance;

mod cohort;
mod evaluate;
mod explain;
mod scoring;
mod synth;
mod train;

#[derive(Debug, Parser)]
#[command(name = "notecnn", version, about = "Readmission prediction from discharge summaries")]
pub struct Cli {
    /// Experiment configuration file.
    #[arg(long, global = true, default_value = "experiment.toml")]
    pub config: PathBuf,
    /// Override the configured seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Override the configured label task.
    #[arg(long, global = true, value_enum)]
    pub task: Option<Task>,
    /// Override the configured model selection.
    #[arg(long, global = true, value_enum)]
    pub model: Option<ModelKind>,
    /// Override the configured output directory.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Partition {
    Test,
    Train,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic admissions dataset with known labels.
    Synth {
        /// Override the configured patient count.
        #[arg(long)]
        patients: Option<usize>,
    },
    /// Build the labeled cohort, balance it, and write the split.
    Cohort,
    /// Train the selected model(s) with cross-validated selection.
    Train,
    /// Score a trained model on the held-out test partition.
    Evaluate {
        /// Partition to score.
        #[arg(long, value_enum, default_value = "test")]
        partition: Partition,
        /// Confirm that scoring the training partition is intentional.
        #[arg(long)]
        allow_train_eval: bool,
    },
    /// Rank features by chi-square over correctly predicted samples.
    Explain {
        /// Override the configured number of reported features.
        #[arg(long)]
        top_k: Option<usize>,
    },
}

/// Loads the configuration file and applies flag overrides.
pub fn effective_config(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        config.experiment.seed = seed;
    }
    if let Some(task) = cli.task {
        config.experiment.task = task;
    }
    if let Some(model) = cli.model {
        config.experiment.model = model;
    }
    if let Some(dir) = &cli.output_dir {
        config.paths.output_dir = Some(dir.clone());
    }
    Ok(config)
}

pub fn provenance(config: &ExperimentConfig) -> Provenance {
    Provenance {
        config_hash: config.config_hash(),
        seed: config.experiment.seed,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let config = effective_config(cli)?;
    match &cli.command {
        Command::Synth { patients } => synth::run(&config, *patients),
        Command::Cohort => cohort::run(&config),
        Command::Train => train::run(&config),
        Command::Evaluate {
            partition,
            allow_train_eval,
        } => evaluate::run(&config, *partition, *allow_train_eval),
        Command::Explain { top_k } => explain::run(&config, *top_k),
    }
}
