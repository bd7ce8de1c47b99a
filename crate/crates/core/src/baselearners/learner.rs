//! One interface over the four model families.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::cart::{fit_cart, CartModel, CartParams};
use super::forest::{fit_random_forest, ForestModel, ForestParams};
use super::linear::{fit_linear, LinearModel, DEFAULT_RIDGE};
use crate::data::Dataset;
use crate::error::{CreditError, Result};
use crate::gbdt::{self, BoostedModel, BoosterParams};
use crate::persist;

pub const LEARNER_KIND: &str = "learner";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    LinearRegression,
    DecisionTree,
    RandomForest,
    Gbdt,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 4] = [
        LearnerKind::LinearRegression,
        LearnerKind::DecisionTree,
        LearnerKind::RandomForest,
        LearnerKind::Gbdt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LearnerKind::LinearRegression => "linear_regression",
            LearnerKind::DecisionTree => "decision_tree",
            LearnerKind::RandomForest => "random_forest",
            LearnerKind::Gbdt => "gbdt",
        }
    }

    /// Short label used in report tables.
    pub fn label(self) -> &'static str {
        match self {
            LearnerKind::LinearRegression => "LR",
            LearnerKind::DecisionTree => "DT",
            LearnerKind::RandomForest => "RF",
            LearnerKind::Gbdt => "GBDT",
        }
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LearnerKind {
    type Err = CreditError;

    fn from_str(s: &str) -> Result<Self> {
        LearnerKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s || k.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| CreditError::InvalidParameter(format!("unknown learner kind `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LearnerParams {
    LinearRegression { ridge_lambda: f64 },
    DecisionTree(CartParams),
    RandomForest(ForestParams),
    Gbdt(BoosterParams),
}

impl LearnerParams {
    pub fn default_for(kind: LearnerKind) -> Self {
        match kind {
            LearnerKind::LinearRegression => LearnerParams::LinearRegression { ridge_lambda: DEFAULT_RIDGE },
            LearnerKind::DecisionTree => LearnerParams::DecisionTree(CartParams::default()),
            LearnerKind::RandomForest => LearnerParams::RandomForest(ForestParams::default()),
            LearnerKind::Gbdt => LearnerParams::Gbdt(BoosterParams::default()),
        }
    }

    pub fn kind(&self) -> LearnerKind {
        match self {
            LearnerParams::LinearRegression { .. } => LearnerKind::LinearRegression,
            LearnerParams::DecisionTree(_) => LearnerKind::DecisionTree,
            LearnerParams::RandomForest(_) => LearnerKind::RandomForest,
            LearnerParams::Gbdt(_) => LearnerKind::Gbdt,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            LearnerParams::LinearRegression { ridge_lambda } => {
                if *ridge_lambda >= 0.0 && ridge_lambda.is_finite() {
                    Ok(())
                } else {
                    Err(CreditError::InvalidParameter(format!("ridge_lambda must be non-negative, got {ridge_lambda}")))
                }
            }
            LearnerParams::DecisionTree(p) => p.validate(),
            LearnerParams::RandomForest(p) => p.validate(),
            LearnerParams::Gbdt(p) => p.validate(),
        }
    }
}

/// A validated learner configuration. The seed drives every random choice
/// of the fit (it overrides `BoosterParams::seed`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerSpec {
    params: LearnerParams,
    seed: u64,
}

impl LearnerSpec {
    pub fn new(params: LearnerParams, seed: u64) -> Result<Self> {
        params.validate()?;
        Ok(LearnerSpec { params, seed })
    }

    pub fn default_for(kind: LearnerKind, seed: u64) -> Self {
        LearnerSpec {
            params: LearnerParams::default_for(kind),
            seed,
        }
    }

    pub fn linear(ridge_lambda: f64) -> Result<Self> {
        Self::new(LearnerParams::LinearRegression { ridge_lambda }, 0)
    }

    pub fn kind(&self) -> LearnerKind {
        self.params.kind()
    }

    pub fn params(&self) -> &LearnerParams {
        &self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        LearnerSpec {
            params: self.params.clone(),
            seed,
        }
    }

    pub fn fit(&self, d: &Dataset) -> Result<FittedLearner> {
        let model = match &self.params {
            LearnerParams::LinearRegression { ridge_lambda } => FittedModel::Linear(fit_linear(d, *ridge_lambda)?),
            LearnerParams::DecisionTree(p) => FittedModel::Tree(fit_cart(d, p)?),
            LearnerParams::RandomForest(p) => FittedModel::Forest(fit_random_forest(d, p, self.seed)?),
            LearnerParams::Gbdt(p) => {
                let p = BoosterParams { seed: self.seed, ..p.clone() };
                FittedModel::Gbdt(gbdt::fit(d, &p)?)
            }
        };
        Ok(FittedLearner {
            spec: self.clone(),
            model,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "snake_case")]
pub enum FittedModel {
    Linear(LinearModel),
    Tree(CartModel),
    Forest(ForestModel),
    Gbdt(BoostedModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedLearner {
    spec: LearnerSpec,
    model: FittedModel,
}

impl FittedLearner {
    /// Wraps a model built outside `LearnerSpec::fit`, such as a fixed linear map.
    pub fn from_linear(model: LinearModel) -> Self {
        FittedLearner {
            spec: LearnerSpec::default_for(LearnerKind::LinearRegression, 0),
            model: FittedModel::Linear(model),
        }
    }

    pub fn spec(&self) -> &LearnerSpec {
        &self.spec
    }

    pub fn kind(&self) -> LearnerKind {
        self.spec.kind()
    }

    pub fn model(&self) -> &FittedModel {
        &self.model
    }

    pub fn feature_names(&self) -> &[String] {
        match &self.model {
            FittedModel::Linear(m) => m.feature_names(),
            FittedModel::Tree(m) => m.feature_names(),
            FittedModel::Forest(m) => m.feature_names(),
            FittedModel::Gbdt(m) => m.feature_names(),
        }
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        match &self.model {
            FittedModel::Linear(m) => m.predict(d),
            FittedModel::Tree(m) => m.predict(d),
            FittedModel::Forest(m) => m.predict(d),
            FittedModel::Gbdt(m) => m.predict(d),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        persist::to_json(LEARNER_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        persist::from_json(LEARNER_KIND, text)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::save(LEARNER_KIND, self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        persist::load(LEARNER_KIND, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Schema, Subset};

    fn ds(n: usize) -> Dataset {
        let x: Vec<f64> = (0..n).map(|i| ((i * 17) % n) as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| if *v > n as f64 / 2.0 { 3.0 * v } else { -v }).collect();
        Dataset::from_columns(Schema::numeric(&["x"], Subset::Other, "y").unwrap(), vec![x], y).unwrap()
    }

    #[test]
    fn every_kind_fits_predicts_and_round_trips() {
        let d = ds(60);
        for kind in LearnerKind::ALL {
            let spec = LearnerSpec::default_for(kind, 5);
            let f = spec.fit(&d).unwrap();
            assert_eq!(f.kind(), kind);
            let p = f.predict(&d).unwrap();
            assert!(p.iter().all(|v| v.is_finite()));
            let back = FittedLearner::from_json(&f.to_json().unwrap()).unwrap();
            assert_eq!(back.predict(&d).unwrap(), p);
            assert!(f.predict(&d.select_rows(&[])).unwrap().is_empty());
        }
    }

    #[test]
    fn kinds_parse_from_names_and_labels() {
        assert_eq!("gbdt".parse::<LearnerKind>().unwrap(), LearnerKind::Gbdt);
        assert_eq!("RF".parse::<LearnerKind>().unwrap(), LearnerKind::RandomForest);
        assert!("svm".parse::<LearnerKind>().is_err());
    }

    #[test]
    fn invalid_params_are_rejected_at_construction() {
        assert!(LearnerSpec::linear(-1.0).is_err());
        let bad = LearnerParams::Gbdt(BoosterParams { num_leaves: 0, ..Default::default() });
        assert!(LearnerSpec::new(bad, 0).is_err());
    }

    #[test]
    fn seed_overrides_booster_seed() {
        let d = ds(80);
        let params = LearnerParams::Gbdt(BoosterParams {
            num_iterations: 5,
            feature_fraction: 0.5,
            bagging_fraction: 0.5,
            bagging_freq: 1,
            min_data_in_leaf: 2,
            seed: 999,
            ..Default::default()
        });
        let a = LearnerSpec::new(params.clone(), 1).unwrap().fit(&d).unwrap();
        let FittedModel::Gbdt(m) = a.model() else { panic!() };
        assert_eq!(m.params().seed, 1);
    }
}
