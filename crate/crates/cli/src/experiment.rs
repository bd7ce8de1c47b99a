//! The comparison pipelines behind `compare-bases` and `compare-fusion`.
//!
//! Both take an already split train/test pair. Every fit is recorded by row
//! id so callers can prove test rows never reached a training stage.

use std::collections::BTreeSet;

use credit_core::data::{canonical_schema, generate_synthetic, load_csv, split_subsets, train_test_split, Preprocessor, Subset};
use credit_core::fusion::{fit_fusion_audited, Strategy};
use credit_core::metrics::ReportRow;
use credit_core::{evaluate, CreditError, Dataset, FusionModel, Result};
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig};

pub fn load_data(config: &ExperimentConfig) -> Result<Dataset> {
    match &config.data {
        DataSource::Synthetic { n_rows, seed } => Ok(generate_synthetic(*n_rows, *seed)),
        DataSource::File(path) => load_csv(path, &canonical_schema()),
    }
}

/// Splits by the global seed, then imputes and clips with statistics from the
/// training rows only.
pub fn prepare(d: &Dataset, config: &ExperimentConfig) -> Result<(Dataset, Dataset)> {
    let (train, test) = train_test_split(d, config.test_fraction, config.seed)?;
    let pre = Preprocessor::fit(&train, &config.preprocess)?;
    Ok((pre.transform(&train)?.0, pre.transform(&test)?.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<ReportRow>,
    /// Id of every row that entered any fit.
    pub fit_ids: BTreeSet<String>,
}

impl Outcome {
    pub fn rows_for(&self, dataset: &str) -> Vec<&ReportRow> {
        self.rows.iter().filter(|r| r.dataset == dataset).collect()
    }

    pub fn row(&self, dataset: &str, method: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.dataset == dataset && r.method == method)
    }
}

/// Every configured learner on every subset, scored on the test split.
/// Rows are grouped by subset in `Subset::ALL` order.
pub fn compare_bases(config: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<Outcome> {
    let train_parts = split_subsets(train);
    let test_parts = split_subsets(test);
    let jobs: Vec<(Subset, usize)> = Subset::ALL
        .into_iter()
        .flat_map(|s| (0..config.learners.len()).map(move |l| (s, l)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(s, l)| {
            let spec = &config.learners[l];
            let model = spec.fit(&train_parts[&s])?;
            let pred = model.predict(&test_parts[&s])?;
            let m = evaluate(test.target(), &pred)?;
            Ok(ReportRow::new(s.as_str(), spec.kind().label(), m))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Outcome {
        rows,
        fit_ids: train.ids().iter().cloned().collect(),
    })
}

pub const FULL_DATASET: &str = "full";

/// Best single-subset GBDT, full-data GBDT, then one row per fusion entry.
///
/// The best subset is the one with the lowest holdout MAE inside the
/// training split (the voting weights carry exactly this ranking); its row
/// reports the subset model refit on the whole training split.
pub fn compare_fusion(config: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<Outcome> {
    if config.fusion.is_empty() {
        return Err(CreditError::Config("compare-fusion needs at least one fusion strategy".into()));
    }
    let learner = &config.fusion_learner;
    let mut fit_ids: BTreeSet<String> = train.ids().iter().cloned().collect();

    let full = learner.fit(train)?;
    let full_pred = full.predict(test)?;

    let mut fusion_rows = Vec::new();
    let mut fused: Vec<(Strategy, FusionModel)> = Vec::new();
    for fc in &config.fusion {
        let (model, audit) = fit_fusion_audited(train, fc, learner)?;
        fit_ids.extend(audit.all_fit_ids().into_iter().map(str::to_string));
        let m = evaluate(test.target(), &model.predict(test)?)?;
        fusion_rows.push(ReportRow::new(FULL_DATASET, format!("GBDT+{}", fc.strategy.label()), m));
        fused.push((fc.strategy, model));
    }

    let ranking = best_subset(config, train, &fused)?;
    fit_ids.extend(ranking.1);
    let best = ranking.0;
    let part = split_subsets(train).remove(&best).expect("every subset is present");
    let single = learner.fit(&part)?;
    let single_pred = single.predict(&test.select_named(single.feature_names())?)?;

    let mut rows = vec![
        ReportRow::new(best.as_str(), "GBDT", evaluate(test.target(), &single_pred)?),
        ReportRow::new(FULL_DATASET, "GBDT", evaluate(test.target(), &full_pred)?),
    ];
    rows.extend(fusion_rows);
    Ok(Outcome { rows, fit_ids })
}

/// Picks the subset by holdout MAE, reusing a voting model's weights when
/// one was fitted and fitting a voting model otherwise.
fn best_subset(
    config: &ExperimentConfig,
    train: &Dataset,
    fused: &[(Strategy, FusionModel)],
) -> Result<(Subset, Vec<String>)> {
    let (weights, ids) = match fused.iter().find(|(s, _)| *s == Strategy::Voting) {
        Some((_, m)) => (m.weights().expect("voting has weights").to_vec(), Vec::new()),
        None => {
            let mut fc = config.fusion[0].clone();
            fc.strategy = Strategy::Voting;
            let (m, audit) = fit_fusion_audited(train, &fc, &config.fusion_learner)?;
            let ids = audit.all_fit_ids().into_iter().map(str::to_string).collect();
            (m.weights().expect("voting has weights").to_vec(), ids)
        }
    };
    // Largest weight means smallest MAE; ties go to the first subset.
    let mut best = 0;
    for (i, w) in weights.iter().enumerate() {
        if *w > weights[best] {
            best = i;
        }
    }
    Ok((Subset::ALL[best], ids))
}
