//! Second-level combination of the four per-subset base models: averaging,
//! inverse-MAE voting, holdout blending and out-of-fold stacking.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselearners::{FittedLearner, LearnerSpec, DEFAULT_RIDGE};
use crate::data::{split_indices, split_subsets, Dataset, Schema, Subset};
use crate::error::{CreditError, Result};
use crate::metrics::evaluate;
use crate::{persist, rng};

pub const FUSION_KIND: &str = "fusion";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Averaging,
    Voting,
    Blending,
    Stacking,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Averaging, Strategy::Voting, Strategy::Blending, Strategy::Stacking];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Averaging => "averaging",
            Strategy::Voting => "voting",
            Strategy::Blending => "blending",
            Strategy::Stacking => "stacking",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Strategy::Averaging => "Averaging",
            Strategy::Voting => "Voting",
            Strategy::Blending => "Blending",
            Strategy::Stacking => "Stacking",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = CreditError;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| CreditError::InvalidParameter(format!("unknown fusion strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub strategy: Strategy,
    /// Stacking folds.
    pub n_folds: usize,
    /// Holdout share for blending and for voting's weight estimation.
    pub holdout_fraction: f64,
    pub meta_learner: LearnerSpec,
    pub seed: u64,
}

impl FusionConfig {
    pub fn new(strategy: Strategy, seed: u64) -> Self {
        FusionConfig {
            strategy,
            n_folds: 5,
            holdout_fraction: 0.2,
            meta_learner: LearnerSpec::linear(DEFAULT_RIDGE).expect("default ridge is valid"),
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.strategy {
            Strategy::Stacking if self.n_folds < 2 => {
                Err(CreditError::InvalidParameter(format!("n_folds must be at least 2, got {}", self.n_folds)))
            }
            Strategy::Blending | Strategy::Voting if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) => {
                Err(CreditError::InvalidParameter(format!(
                    "holdout_fraction must lie in (0, 1), got {}",
                    self.holdout_fraction
                )))
            }
            _ => self.meta_learner.params().validate(),
        }
    }
}

pub type BaseModels = BTreeMap<Subset, FittedLearner>;

/// One learner per subset, each on that subset's columns only.
pub fn fit_base_models(train: &Dataset, learner: &LearnerSpec) -> Result<BaseModels> {
    let parts: Vec<(Subset, Dataset)> = split_subsets(train).into_iter().collect();
    if let Some((s, _)) = parts.iter().find(|(_, d)| d.n_cols() == 0) {
        return Err(CreditError::SchemaMismatch(format!("subset {s} has no columns")));
    }
    let fitted = parts
        .par_iter()
        .map(|(s, d)| Ok((*s, learner.fit(d)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(fitted.into_iter().collect())
}

/// Per-subset predictions, one column per subset in `Subset::ALL` order.
pub fn base_predictions(models: &BaseModels, d: &Dataset) -> Result<Vec<Vec<f64>>> {
    models
        .values()
        .map(|m| m.predict(&d.select_named(m.feature_names())?))
        .collect()
}

fn weighted(columns: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    let n = columns.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| columns.iter().zip(weights).map(|(c, w)| w * c[i]).sum())
        .collect()
}

fn mean_rows(columns: &[Vec<f64>]) -> Vec<f64> {
    let n = columns.first().map_or(0, Vec::len);
    let k = columns.len() as f64;
    (0..n).map(|i| columns.iter().map(|c| c[i]).sum::<f64>() / k).collect()
}

pub fn fuse_averaging(models: &BaseModels, test: &Dataset) -> Result<Vec<f64>> {
    Ok(mean_rows(&base_predictions(models, test)?))
}

pub fn fuse_voting(models: &BaseModels, weights: &[f64], test: &Dataset) -> Result<Vec<f64>> {
    if weights.len() != models.len() {
        return Err(CreditError::Dimension(format!("{} weights for {} models", weights.len(), models.len())));
    }
    Ok(weighted(&base_predictions(models, test)?, weights))
}

/// `w ∝ 1/MAE`, normalised. Models with zero MAE share all the weight.
pub fn voting_weights_from_mae(maes: &[f64]) -> Vec<f64> {
    let perfect = maes.iter().filter(|&&m| m == 0.0).count();
    if perfect > 0 {
        return maes.iter().map(|&m| if m == 0.0 { 1.0 / perfect as f64 } else { 0.0 }).collect();
    }
    let inv: Vec<f64> = maes.iter().map(|m| 1.0 / m).collect();
    let total: f64 = inv.iter().sum();
    inv.iter().map(|v| v / total).collect()
}

pub fn fit_voting_weights(models: &BaseModels, validation: &Dataset) -> Result<Vec<f64>> {
    let preds = base_predictions(models, validation)?;
    let maes = preds
        .iter()
        .map(|p| Ok(evaluate(validation.target(), p)?.mae))
        .collect::<Result<Vec<f64>>>()?;
    Ok(voting_weights_from_mae(&maes))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    OutOfFold,
    Holdout,
    TestTime,
}

/// Base predictions as meta-learner inputs: one column per subset.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaFeatures {
    pub columns: Vec<Vec<f64>>,
    pub row_ids: Vec<String>,
    pub provenance: Provenance,
}

fn meta_schema() -> Schema {
    let names: Vec<&str> = Subset::ALL.iter().map(|s| s.as_str()).collect();
    Schema::numeric(&names, Subset::Other, "target").expect("subset names are distinct")
}

impl MetaFeatures {
    pub fn n_rows(&self) -> usize {
        self.row_ids.len()
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    fn to_dataset(&self, target: Vec<f64>) -> Result<Dataset> {
        Dataset::new(meta_schema(), self.columns.clone(), target, self.row_ids.clone())
    }
}

/// Training rows (by id) behind one fitted model.
#[derive(Debug, Clone, PartialEq)]
pub struct FitRecord {
    pub stage: String,
    pub subset: Option<Subset>,
    pub row_ids: Vec<String>,
}

/// Bookkeeping of a fusion fit: every training set used, the meta-features,
/// and for stacking the fold of each training row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FusionAudit {
    pub fits: Vec<FitRecord>,
    pub meta_features: Option<MetaFeatures>,
    /// Stacking: `fold_of[i]` is the fold of training row `i`.
    pub fold_of: Vec<usize>,
    /// Stacking: ids of the rows each fold model was trained on, per subset.
    pub fold_train_ids: Vec<BTreeMap<Subset, Vec<String>>>,
}

impl FusionAudit {
    fn record(&mut self, stage: &str, subset: Option<Subset>, d: &Dataset) {
        self.fits.push(FitRecord {
            stage: stage.to_string(),
            subset,
            row_ids: d.ids().to_vec(),
        });
    }

    fn record_bases(&mut self, stage: &str, d: &Dataset) {
        for s in Subset::ALL {
            self.record(stage, Some(s), d);
        }
    }

    /// Every id that entered any fit.
    pub fn all_fit_ids(&self) -> std::collections::BTreeSet<&str> {
        self.fits.iter().flat_map(|f| f.row_ids.iter().map(String::as_str)).collect()
    }

    /// Checks that no out-of-fold value came from a model that saw its row.
    pub fn verify_out_of_fold(&self) -> Result<()> {
        let Some(meta) = &self.meta_features else {
            return Err(CreditError::InvalidParameter("no meta-features recorded".into()));
        };
        if meta.provenance != Provenance::OutOfFold {
            return Err(CreditError::InvalidParameter("meta-features are not out-of-fold".into()));
        }
        for (i, id) in meta.row_ids.iter().enumerate() {
            let fold = self.fold_of[i];
            for (s, ids) in &self.fold_train_ids[fold] {
                if ids.iter().any(|t| t == id) {
                    return Err(CreditError::InvalidParameter(format!(
                        "row {id} fed the {s} model of its own fold {fold}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    strategy: Strategy,
    base_models: BaseModels,
    weights: Option<Vec<f64>>,
    meta_model: Option<FittedLearner>,
    /// Column name → subset, as seen at fit time.
    subset_assignment: Vec<(String, Subset)>,
}

fn assignment(d: &Dataset) -> Vec<(String, Subset)> {
    d.schema().columns().iter().map(|c| (c.name.clone(), c.subset)).collect()
}

fn holdout_split(train: &Dataset, config: &FusionConfig) -> Result<(Dataset, Dataset)> {
    let (fit_idx, hold_idx) = split_indices(train.n_rows(), config.holdout_fraction, config.seed)?;
    if hold_idx.len() < 10 {
        return Err(CreditError::InvalidParameter(format!(
            "holdout of {} rows is too small; need at least 10",
            hold_idx.len()
        )));
    }
    Ok((train.select_rows(&fit_idx), train.select_rows(&hold_idx)))
}

/// Round-robin fold of each row after a seeded shuffle.
pub fn fold_assignment(n_rows: usize, n_folds: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n_rows).collect();
    perm.shuffle(&mut rng::stream(seed, rng::FOLDS, 0));
    let mut fold = vec![0; n_rows];
    for (j, &r) in perm.iter().enumerate() {
        fold[r] = j % n_folds;
    }
    fold
}

pub fn fit_averaging(train: &Dataset, learner: &LearnerSpec) -> Result<FusionModel> {
    Ok(fit_averaging_audited(train, learner)?.0)
}

fn fit_averaging_audited(train: &Dataset, learner: &LearnerSpec) -> Result<(FusionModel, FusionAudit)> {
    let mut audit = FusionAudit::default();
    audit.record_bases("base", train);
    let base_models = fit_base_models(train, learner)?;
    let model = FusionModel {
        strategy: Strategy::Averaging,
        base_models,
        weights: None,
        meta_model: None,
        subset_assignment: assignment(train),
    };
    Ok((model, audit))
}

fn fit_voting_audited(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<(FusionModel, FusionAudit)> {
    let (fit_part, holdout) = holdout_split(train, config)?;
    let mut audit = FusionAudit::default();
    audit.record_bases("base", &fit_part);
    let base_models = fit_base_models(&fit_part, learner)?;
    let weights = fit_voting_weights(&base_models, &holdout)?;
    audit.record("voting_weights", None, &holdout);
    let model = FusionModel {
        strategy: Strategy::Voting,
        base_models,
        weights: Some(weights),
        meta_model: None,
        subset_assignment: assignment(train),
    };
    Ok((model, audit))
}

pub fn fit_blending(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<FusionModel> {
    Ok(fit_blending_audited(train, config, learner)?.0)
}

fn fit_blending_audited(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<(FusionModel, FusionAudit)> {
    config.validate()?;
    let (fit_part, holdout) = holdout_split(train, config)?;
    let mut audit = FusionAudit::default();
    audit.record_bases("base", &fit_part);
    let base_models = fit_base_models(&fit_part, learner)?;
    let meta = MetaFeatures {
        columns: base_predictions(&base_models, &holdout)?,
        row_ids: holdout.ids().to_vec(),
        provenance: Provenance::Holdout,
    };
    let meta_train = meta.to_dataset(holdout.target().to_vec())?;
    audit.record("meta", None, &meta_train);
    let meta_model = config.meta_learner.fit(&meta_train)?;
    audit.meta_features = Some(meta);
    let model = FusionModel {
        strategy: Strategy::Blending,
        base_models,
        weights: None,
        meta_model: Some(meta_model),
        subset_assignment: assignment(train),
    };
    Ok((model, audit))
}

pub fn fit_stacking(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<FusionModel> {
    Ok(fit_stacking_audited(train, config, learner)?.0)
}

fn fit_stacking_audited(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<(FusionModel, FusionAudit)> {
    config.validate()?;
    let n = train.n_rows();
    let k = config.n_folds;
    if k > n {
        return Err(CreditError::InvalidParameter(format!("{k} folds for {n} rows")));
    }
    let fold_of = fold_assignment(n, k, config.seed);
    let members: Vec<Vec<usize>> = (0..k).map(|f| (0..n).filter(|&i| fold_of[i] == f).collect()).collect();
    let rests: Vec<Vec<usize>> = (0..k).map(|f| (0..n).filter(|&i| fold_of[i] != f).collect()).collect();

    let per_fold = (0..k)
        .into_par_iter()
        .map(|f| {
            let fit_part = train.select_rows(&rests[f]);
            let held = train.select_rows(&members[f]);
            let models = fit_base_models(&fit_part, learner)?;
            let preds = base_predictions(&models, &held)?;
            let ids: BTreeMap<Subset, Vec<String>> = models
                .keys()
                .map(|&s| (s, fit_part.ids().to_vec()))
                .collect();
            Ok((preds, ids))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut audit = FusionAudit {
        fold_of: fold_of.clone(),
        ..Default::default()
    };
    let mut columns = vec![vec![0.0; n]; Subset::ALL.len()];
    for (f, (preds, ids)) in per_fold.into_iter().enumerate() {
        for (b, col) in preds.iter().enumerate() {
            for (j, &i) in members[f].iter().enumerate() {
                columns[b][i] = col[j];
            }
        }
        for (&s, rows) in &ids {
            audit.fits.push(FitRecord {
                stage: format!("fold{f}"),
                subset: Some(s),
                row_ids: rows.clone(),
            });
        }
        audit.fold_train_ids.push(ids);
    }
    let meta = MetaFeatures {
        columns,
        row_ids: train.ids().to_vec(),
        provenance: Provenance::OutOfFold,
    };
    let meta_train = meta.to_dataset(train.target().to_vec())?;
    audit.record("meta", None, &meta_train);
    let meta_model = config.meta_learner.fit(&meta_train)?;
    audit.meta_features = Some(meta);
    audit.record_bases("refit", train);
    let base_models = fit_base_models(train, learner)?;
    let model = FusionModel {
        strategy: Strategy::Stacking,
        base_models,
        weights: None,
        meta_model: Some(meta_model),
        subset_assignment: assignment(train),
    };
    Ok((model, audit))
}

/// Fits the configured strategy.
pub fn fit_fusion(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<FusionModel> {
    Ok(fit_fusion_audited(train, config, learner)?.0)
}

/// As [`fit_fusion`], also returning the audit trail.
pub fn fit_fusion_audited(train: &Dataset, config: &FusionConfig, learner: &LearnerSpec) -> Result<(FusionModel, FusionAudit)> {
    config.validate()?;
    match config.strategy {
        Strategy::Averaging => fit_averaging_audited(train, learner),
        Strategy::Voting => fit_voting_audited(train, config, learner),
        Strategy::Blending => fit_blending_audited(train, config, learner),
        Strategy::Stacking => fit_stacking_audited(train, config, learner),
    }
}

pub fn predict_fusion(m: &FusionModel, test: &Dataset) -> Result<Vec<f64>> {
    m.predict(test)
}

impl FusionModel {
    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn base_models(&self) -> &BaseModels {
        &self.base_models
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn meta_model(&self) -> Option<&FittedLearner> {
        self.meta_model.as_ref()
    }

    pub fn subset_assignment(&self) -> &[(String, Subset)] {
        &self.subset_assignment
    }

    /// Column names the model reads, in fit-time order.
    pub fn feature_names(&self) -> Vec<String> {
        self.subset_assignment.iter().map(|(n, _)| n.clone()).collect()
    }

    /// Replaces the meta-model, e.g. with fixed coefficients.
    pub fn with_meta_model(mut self, meta: FittedLearner) -> Result<Self> {
        if self.meta_model.is_none() {
            return Err(CreditError::InvalidParameter(format!("{} has no meta-model", self.strategy)));
        }
        self.meta_model = Some(meta);
        Ok(self)
    }

    pub fn predict(&self, test: &Dataset) -> Result<Vec<f64>> {
        let names = self.feature_names();
        let missing: Vec<String> = names.iter().filter(|n| test.schema().index_of(n).is_none()).cloned().collect();
        if !missing.is_empty() {
            return Err(CreditError::ColumnMismatch {
                missing,
                unexpected: vec![],
            });
        }
        let preds = base_predictions(&self.base_models, test)?;
        match self.strategy {
            Strategy::Averaging => Ok(mean_rows(&preds)),
            Strategy::Voting => Ok(weighted(&preds, self.weights.as_deref().unwrap_or_default())),
            Strategy::Blending | Strategy::Stacking => {
                let meta = MetaFeatures {
                    columns: preds,
                    row_ids: test.ids().to_vec(),
                    provenance: Provenance::TestTime,
                };
                let model = self.meta_model.as_ref().expect("meta strategies carry a meta-model");
                model.predict(&meta.to_dataset(vec![0.0; test.n_rows()])?)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        persist::to_json(FUSION_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        persist::from_json(FUSION_KIND, text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::save(FUSION_KIND, self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        persist::load(FUSION_KIND, path)
    }
}

/// Names of the meta-learner's input columns, one per subset.
pub fn meta_feature_names() -> Vec<String> {
    meta_schema().names()
}
