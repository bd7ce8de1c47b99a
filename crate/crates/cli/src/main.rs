use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use credit_cli::commands::{cmd_compare_bases, cmd_compare_fusion, cmd_generate, cmd_predict, cmd_train};
use credit_cli::ExperimentConfig;
use credit_core::metrics::build_report_table;

#[derive(Parser)]
#[command(name = "credit", version, about = "Credit scoring with boosted trees and subset model fusion")]
struct Cli {
    /// Experiment config (flat `key = value` file).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config's global seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory; must exist.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic dataset to `<out>/synthetic.csv`.
    Generate {
        /// Row count; defaults to the config's `data.synthetic.n`.
        #[arg(long)]
        rows: Option<usize>,
    },
    /// Every learner on every feature subset.
    CompareBases,
    /// Single-subset, full-data and fused GBDT.
    CompareFusion,
    /// Fit the configured fusion strategy and save it.
    Train,
    /// Score a CSV file with a saved model.
    Predict {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config = config.with_seed(seed);
    }
    if let Some(out) = cli.out {
        config.output_dir = out;
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        anyhow::ensure!(n >= 1, "--threads must be at least 1");
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building the thread pool")?;

    pool.install(|| -> Result<()> {
        match cli.command {
            Command::Generate { rows } => {
                let n = rows.unwrap_or(match config.data {
                    credit_cli::DataSource::Synthetic { n_rows, .. } => n_rows,
                    credit_cli::DataSource::File(_) => 5000,
                });
                let path = cmd_generate(n, config.seed, &config.output_dir)?;
                println!("wrote {n} rows to {}", path.display());
            }
            Command::CompareBases => {
                let outcome = cmd_compare_bases(&config)?;
                print!("{}", build_report_table(outcome.rows).to_text());
            }
            Command::CompareFusion => {
                let outcome = cmd_compare_fusion(&config)?;
                print!("{}", build_report_table(outcome.rows).to_text());
            }
            Command::Train => print!("{}", cmd_train(&config)?.to_text()),
            Command::Predict { model, data } => {
                let path = cmd_predict(&model, &data, &config.output_dir)?;
                println!("wrote {}", path.display());
            }
        }
        Ok(())
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
