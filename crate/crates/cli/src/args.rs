//! Command-line arguments. Every subcommand takes an optional `--config`
//! JSON file; flags given on the command line override its values.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::commands;
use crate::config::{apply_overrides, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "adatriplet", version, about = "AdaTriplet metric-learning experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic longitudinal dataset (dataset.csv).
    Synth(RunArgs),
    /// Train and write history, histograms, margin trace and embeddings.
    Train(RunArgs),
    /// Score embeddings against a dataset, grouped by query year.
    Eval(RunArgs),
    /// Export a loss surface and negative gradient field (surface.csv).
    Surface(RunArgs),
    /// Compare analytic gradients with finite differences; exit 3 on failure.
    Gradcheck(RunArgs),
    /// Train and evaluate over a list of values of one hyperparameter.
    Sweep(RunArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct RunArgs {
    /// JSON config file; see README for the schema.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub out_dir: PathBuf,
    /// Extra `key=value` overrides; the value is parsed as JSON, falling
    /// back to a plain string.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    #[serde(skip)]
    pub set: Vec<String>,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dataset: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_subjects: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub years: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_dim: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class_sep: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drift: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_std: Option<f64>,
    /// free_embedding | linear
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub encoder: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub embed_dim: Option<usize>,
    /// triplet | adatriplet | contrastive
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<String>,
    /// fixed | automargin | quartile
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin_mode: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_delta: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_an: Option<u32>,
    /// q1 | q2
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quartile: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_pos: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_neg: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epochs: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub batch_size: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_subject: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lr: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weight_decay: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_triplets: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holdout_fraction: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// triplet | adatriplet
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface_loss: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gradcheck_batches: Option<usize>,
    #[arg(long, hide = true)]
    #[serde(rename = "gradcheck_corrupt", skip_serializing_if = "Option::is_none")]
    pub corrupt_gradient: Option<f64>,
    /// epsilon | lambda | K_delta | K_an
    #[arg(long = "parameter")]
    #[serde(rename = "sweep_parameter", skip_serializing_if = "Option::is_none")]
    pub sweep_parameter: Option<String>,
    /// Comma-separated sweep values.
    #[arg(long = "values", value_delimiter = ',')]
    #[serde(rename = "sweep_values", skip_serializing_if = "Option::is_none")]
    pub sweep_values: Option<Vec<f64>>,
    #[arg(long = "seeds")]
    #[serde(rename = "sweep_seeds", skip_serializing_if = "Option::is_none")]
    pub sweep_seeds: Option<usize>,
}

impl RunArgs {
    /// File config (or defaults) with flag overrides applied.
    pub fn experiment_config(&self) -> Result<ExperimentConfig, CliError> {
        let base = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let mut overrides = serde_json::to_value(self).expect("args serialize");
        let map = overrides.as_object_mut().expect("args serialize to an object");
        for kv in &self.set {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("--set {kv}: expected KEY=VALUE")))?;
            let value = serde_json::from_str(v).unwrap_or_else(|_| serde_json::Value::String(v.to_string()));
            map.insert(k.to_string(), value);
        }
        apply_overrides(base, overrides)
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => {
            let path = commands::cmd_synth(a.experiment_config()?, &a.out_dir)?;
            println!("wrote {}", path.display());
        }
        Command::Train(a) => {
            let out = commands::cmd_train(a.experiment_config()?, &a.out_dir)?;
            if let (Some(first), Some(last)) = (out.history.first(), out.history.last()) {
                println!(
                    "epoch 1: loss {:.6} mean delta {:.4}; epoch {}: loss {:.6} mean delta {:.4}",
                    first.mean_loss, first.mean_delta, last.epoch, last.mean_loss, last.mean_delta
                );
            }
            println!("wrote outputs to {}", a.out_dir.display());
        }
        Command::Eval(a) => {
            let report = commands::cmd_eval(a.experiment_config()?, &a.out_dir)?;
            commands::print_report(&report);
        }
        Command::Surface(a) => {
            let path = commands::cmd_surface(a.experiment_config()?, &a.out_dir)?;
            println!("wrote {}", path.display());
        }
        Command::Gradcheck(a) => match commands::cmd_gradcheck(a.experiment_config()?, &a.out_dir) {
            Ok(max) => println!("gradcheck passed: max relative error {max:e}"),
            Err(CliError::Verification(msg)) => {
                println!("gradcheck FAILED: {msg}");
                return Err(CliError::Verification(msg));
            }
            Err(e) => return Err(e),
        },
        Command::Sweep(a) => {
            let runs = commands::cmd_sweep(a.experiment_config()?, &a.out_dir)?;
            println!(
                "{} runs; summary in {}",
                runs.len(),
                a.out_dir.join("sweep.csv").display()
            );
        }
    }
    Ok(())
}
