use serde::{Deserialize, Serialize};

use crate::binning::DEFAULT_MAX_BIN;
use crate::error::{CreditError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    #[default]
    L2Regression,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoosterParams {
    pub num_iterations: usize,
    pub learning_rate: f64,
    pub num_leaves: usize,
    /// `None` means unlimited.
    pub max_depth: Option<usize>,
    pub min_data_in_leaf: usize,
    pub max_bin: usize,
    pub feature_fraction: f64,
    pub bagging_fraction: f64,
    /// Re-draw the row sample every `bagging_freq` iterations; 0 disables bagging.
    pub bagging_freq: usize,
    pub lambda_l2: f64,
    pub min_gain_to_split: f64,
    pub objective: Objective,
    pub seed: u64,
}

impl Default for BoosterParams {
    fn default() -> Self {
        BoosterParams {
            num_iterations: 100,
            learning_rate: 0.1,
            num_leaves: 31,
            max_depth: None,
            min_data_in_leaf: 20,
            max_bin: DEFAULT_MAX_BIN,
            feature_fraction: 1.0,
            bagging_fraction: 1.0,
            bagging_freq: 0,
            lambda_l2: 0.0,
            min_gain_to_split: 0.0,
            objective: Objective::L2Regression,
            seed: 0,
        }
    }
}

fn unit_interval(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v <= 1.0 {
        Ok(())
    } else {
        Err(CreditError::InvalidParameter(format!("{name} must lie in (0, 1], got {v}")))
    }
}

impl BoosterParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(CreditError::InvalidParameter(m));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if self.num_leaves < 2 {
            return bad(format!("num_leaves must be at least 2, got {}", self.num_leaves));
        }
        if self.max_depth == Some(0) {
            return bad("max_depth must be at least 1 when bounded".into());
        }
        if self.min_data_in_leaf < 1 {
            return bad("min_data_in_leaf must be at least 1".into());
        }
        if self.max_bin < 2 {
            return bad(format!("max_bin must be at least 2, got {}", self.max_bin));
        }
        unit_interval("feature_fraction", self.feature_fraction)?;
        unit_interval("bagging_fraction", self.bagging_fraction)?;
        if !(self.lambda_l2 >= 0.0 && self.lambda_l2.is_finite()) {
            return bad(format!("lambda_l2 must be non-negative, got {}", self.lambda_l2));
        }
        if !(self.min_gain_to_split >= 0.0 && self.min_gain_to_split.is_finite()) {
            return bad(format!("min_gain_to_split must be non-negative, got {}", self.min_gain_to_split));
        }
        Ok(())
    }

    pub fn split_constraints(&self) -> SplitConstraints {
        SplitConstraints {
            lambda_l2: self.lambda_l2,
            min_data_in_leaf: self.min_data_in_leaf,
            min_gain_to_split: self.min_gain_to_split,
        }
    }

    pub(crate) fn bagging_enabled(&self) -> bool {
        self.bagging_freq > 0 && self.bagging_fraction < 1.0
    }
}

/// The subset of parameters the split finders need.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitConstraints {
    pub lambda_l2: f64,
    pub min_data_in_leaf: usize,
    pub min_gain_to_split: f64,
}

impl Default for SplitConstraints {
    fn default() -> Self {
        BoosterParams::default().split_constraints()
    }
}
