//! One function per subcommand. Each writes its files under the configured
//! output directory, which must already exist.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use credit_core::data::{generate_synthetic, load_csv_unlabeled, split_subsets, write_csv, ColumnKind, ColumnSpec, Schema, Subset};
use credit_core::metrics::{build_report_table, ReportRow};
use credit_core::{evaluate, fusion, CreditError, FusionModel, Result};

use crate::config::ExperimentConfig;
use crate::experiment::{compare_bases, compare_fusion, load_data, prepare, Outcome};

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CreditError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn require_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(CreditError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "output directory does not exist"),
        })
    }
}

/// Writes `n_rows` synthetic records to `<out>/synthetic.csv`.
pub fn cmd_generate(n_rows: usize, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    if n_rows == 0 {
        return Err(CreditError::InvalidParameter("cannot generate zero rows".into()));
    }
    require_dir(out_dir)?;
    let path = out_dir.join("synthetic.csv");
    write_csv(&generate_synthetic(n_rows, seed), &path)?;
    Ok(path)
}

fn write_tables(dir: &Path, stem: &str, rows: &[ReportRow]) -> Result<()> {
    let table = build_report_table(rows.to_vec());
    write(&dir.join(format!("{stem}.txt")), &table.to_text())?;
    write(&dir.join(format!("{stem}.csv")), &table.to_csv())
}

/// Per-subset tables `bases_<subset>.{txt,csv}` plus the combined `bases.{txt,csv}`.
pub fn cmd_compare_bases(config: &ExperimentConfig) -> Result<Outcome> {
    require_dir(&config.output_dir)?;
    let (train, test) = prepare(&load_data(config)?, config)?;
    let outcome = compare_bases(config, &train, &test)?;
    for s in Subset::ALL {
        let rows: Vec<ReportRow> = outcome.rows_for(s.as_str()).into_iter().cloned().collect();
        write_tables(&config.output_dir, &format!("bases_{s}"), &rows)?;
    }
    write_tables(&config.output_dir, "bases", &outcome.rows)?;
    Ok(outcome)
}

/// The five-row fusion table as `fusion.{txt,csv}`.
pub fn cmd_compare_fusion(config: &ExperimentConfig) -> Result<Outcome> {
    require_dir(&config.output_dir)?;
    let (train, test) = prepare(&load_data(config)?, config)?;
    let outcome = compare_fusion(config, &train, &test)?;
    write_tables(&config.output_dir, "fusion", &outcome.rows)?;
    Ok(outcome)
}

pub struct TrainSummary {
    pub model_path: PathBuf,
    pub model: FusionModel,
    /// Each base model on its subset of the held-out split.
    pub validation: Vec<ReportRow>,
}

impl TrainSummary {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} model written to {}\n", self.model.strategy(), self.model_path.display());
        let _ = write!(out, "{}", build_report_table(self.validation.clone()).to_text());
        out
    }
}

/// Fits the single configured fusion strategy on the training split and
/// saves it as `<out>/model.json`.
pub fn cmd_train(config: &ExperimentConfig) -> Result<TrainSummary> {
    let [fc] = config.fusion.as_slice() else {
        return Err(CreditError::Config(format!(
            "train needs exactly one fusion.strategy, got {}",
            config.fusion.len()
        )));
    };
    require_dir(&config.output_dir)?;
    let (train, test) = prepare(&load_data(config)?, config)?;
    let model = fusion::fit_fusion(&train, fc, &config.fusion_learner)?;
    let parts = split_subsets(&test);
    let validation = model
        .base_models()
        .iter()
        .map(|(s, m)| {
            let pred = m.predict(&parts[s])?;
            Ok(ReportRow::new(s.as_str(), m.kind().label(), evaluate(test.target(), &pred)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let model_path = config.output_dir.join("model.json");
    model.save(&model_path)?;
    Ok(TrainSummary {
        model_path,
        model,
        validation,
    })
}

/// Scores every row of `data` with a saved fusion model and writes
/// `id,score` to `<out>/scores.csv`, in input order.
pub fn cmd_predict(model_path: &Path, data: &Path, out_dir: &Path) -> Result<PathBuf> {
    let model = FusionModel::load(model_path)?;
    require_dir(out_dir)?;
    let columns = model
        .subset_assignment()
        .iter()
        .map(|(name, subset)| ColumnSpec::new(name.clone(), ColumnKind::Numeric, *subset))
        .collect();
    let schema = Schema::new(columns, "score")?;
    let d = load_csv_unlabeled(data, &schema)?;
    for (spec, col) in schema.columns().iter().zip(d.columns()) {
        if let Some(row) = col.iter().position(|v| !v.is_finite()) {
            return Err(CreditError::Parse {
                row: row + 1,
                column: spec.name.clone(),
                value: String::new(),
            });
        }
    }
    let scores = model.predict(&d)?;
    let mut text = String::from("id,score\n");
    for (id, s) in d.ids().iter().zip(&scores) {
        let _ = writeln!(text, "{id},{s}");
    }
    let path = out_dir.join("scores.csv");
    write(&path, &text)?;
    Ok(path)
}
