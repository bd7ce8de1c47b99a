//! The boosting loop and the fitted additive model.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grower::grow_tree_leafwise_with_stats;
use super::params::BoosterParams;
use super::tree::Tree;
use crate::binning::{apply_bins, fit_bins, BinMapper, BinnedDataset};
use crate::data::Dataset;
use crate::error::{CreditError, Result};
use crate::{persist, rng};

pub const MODEL_KIND: &str = "gbdt";

/// Prediction over this many rows is split across threads.
const PARALLEL_ROWS: usize = 4096;

/// Squared-loss gradients: `grad = ŷ − y`, `hess = 1`.
pub fn compute_gradients(target: &[f64], prediction: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if target.len() != prediction.len() {
        return Err(CreditError::Dimension(format!(
            "{} targets vs {} predictions",
            target.len(),
            prediction.len()
        )));
    }
    let grad = prediction.iter().zip(target).map(|(p, y)| p - y).collect();
    Ok((grad, vec![1.0; target.len()]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    base_score: f64,
    trees: Vec<Tree>,
    params: BoosterParams,
    mapper: BinMapper,
    feature_names: Vec<String>,
}

/// Per-iteration training loss, recorded alongside a fit.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitTrace {
    /// `train_mse[0]` is the loss of the base score alone; entry `i` follows tree `i`.
    pub train_mse: Vec<f64>,
    pub direct_builds: usize,
    pub subtracted: usize,
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    // A constant target keeps its exact value instead of a rounded sum / n.
    if xs.iter().all(|&x| x == xs[0]) {
        return xs[0];
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

fn mse(target: &[f64], pred: &[f64]) -> f64 {
    target.iter().zip(pred).map(|(y, p)| (y - p) * (y - p)).sum::<f64>() / target.len() as f64
}

pub fn fit(d: &Dataset, params: &BoosterParams) -> Result<BoostedModel> {
    Ok(fit_traced(d, params)?.0)
}

/// A fresh bagging sample when iteration `it` redraws one.
fn redraw_bag(n_rows: usize, params: &BoosterParams, it: usize) -> Option<Vec<u32>> {
    if !(params.bagging_enabled() && it.is_multiple_of(params.bagging_freq)) {
        return None;
    }
    let k = rng::fraction_count(params.bagging_fraction, n_rows);
    let mut r = rng::stream(params.seed, rng::BAGGING, it as u64);
    Some(rng::sample_sorted(&mut r, n_rows, k).into_iter().map(|i| i as u32).collect())
}

/// Rows observed by `fit`: the bagged sample of each iteration.
pub fn fit_row_samples(n_rows: usize, params: &BoosterParams) -> Vec<Vec<u32>> {
    let mut current: Vec<u32> = (0..n_rows as u32).collect();
    (0..params.num_iterations)
        .map(|it| {
            if let Some(bag) = redraw_bag(n_rows, params, it) {
                current = bag;
            }
            current.clone()
        })
        .collect()
}

fn tree_features(n_features: usize, params: &BoosterParams, iteration: usize) -> Vec<usize> {
    if params.feature_fraction >= 1.0 {
        return (0..n_features).collect();
    }
    let k = rng::fraction_count(params.feature_fraction, n_features);
    let mut r = rng::stream(params.seed, rng::FEATURES, iteration as u64);
    rng::sample_sorted(&mut r, n_features, k)
}

pub fn fit_traced(d: &Dataset, params: &BoosterParams) -> Result<(BoostedModel, FitTrace)> {
    params.validate()?;
    if d.is_empty() {
        return Err(CreditError::InvalidParameter("cannot fit on an empty dataset".into()));
    }
    let mapper = fit_bins(d, params.max_bin)?;
    let bd = apply_bins(d, &mapper)?;
    let n = d.n_rows();
    let target = d.target();
    let base_score = mean(target);
    let mut pred = vec![base_score; n];
    let mut trace = FitTrace {
        train_mse: vec![mse(target, &pred)],
        ..Default::default()
    };

    let mut trees = Vec::with_capacity(params.num_iterations);
    let mut rows: Vec<u32> = (0..n as u32).collect();
    for it in 0..params.num_iterations {
        let (grad, hess) = compute_gradients(target, &pred)?;
        if let Some(bag) = redraw_bag(n, params, it) {
            rows = bag;
        }
        let features = tree_features(d.n_cols(), params, it);
        let (tree, stats) = grow_tree_leafwise_with_stats(&bd, &rows, &features, &grad, &hess, params)?;
        trace.direct_builds += stats.direct_builds;
        trace.subtracted += stats.subtracted;
        add_tree(&mut pred, &tree, &bd);
        trace.train_mse.push(mse(target, &pred));
        trees.push(tree);
    }

    let model = BoostedModel {
        base_score,
        trees,
        params: params.clone(),
        mapper,
        feature_names: d.schema().names(),
    };
    Ok((model, trace))
}

fn add_tree(pred: &mut [f64], tree: &Tree, bd: &BinnedDataset) {
    if pred.len() >= PARALLEL_ROWS {
        pred.par_iter_mut().enumerate().for_each(|(r, p)| *p += tree.predict_binned_row(bd, r));
    } else {
        for (r, p) in pred.iter_mut().enumerate() {
            *p += tree.predict_binned_row(bd, r);
        }
    }
}

impl BoostedModel {
    pub fn base_score(&self) -> f64 {
        self.base_score
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn params(&self) -> &BoosterParams {
        &self.params
    }

    pub fn mapper(&self) -> &BinMapper {
        &self.mapper
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// `base_score + Σ leaf weights`, trees added in fit order.
    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.check_columns(&self.feature_names)?;
        let bd = apply_bins(d, &self.mapper)?;
        let mut pred = vec![self.base_score; d.n_rows()];
        for t in &self.trees {
            add_tree(&mut pred, t, &bd);
        }
        Ok(pred)
    }

    pub fn to_json(&self) -> Result<String> {
        persist::to_json(MODEL_KIND, self)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: BoostedModel = persist::from_json(MODEL_KIND, text)?;
        m.check()?;
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        persist::save(MODEL_KIND, self, path)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let m: BoostedModel = persist::load(MODEL_KIND, path)?;
        m.check()?;
        Ok(m)
    }

    fn check(&self) -> Result<()> {
        if self.mapper.n_features() != self.feature_names.len() {
            return Err(CreditError::Format("bin mapper and feature names disagree".into()));
        }
        for t in &self.trees {
            t.validate()?;
            if !t.uses_bins() {
                return Err(CreditError::Format("gbdt tree without bin thresholds".into()));
            }
            for n in t.nodes() {
                if let super::tree::Node::Split { feature, bin_threshold: Some(b), .. } = *n {
                    if feature >= self.feature_names.len() || b >= self.mapper.n_bins(feature) {
                        return Err(CreditError::Format(format!("split on feature {feature} bin {b} out of range")));
                    }
                }
            }
        }
        Ok(())
    }
}
