//! Random forest: bootstrap-sampled CART trees with per-split feature
//! sampling, averaged.

use rayon::prelude::*;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::cart::{build_tree, CartParams};
use crate::data::Dataset;
use crate::error::{CreditError, Result};
use crate::gbdt::Tree;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: Option<usize>,
    pub min_data_in_leaf: usize,
    /// Share of features drawn (without replacement) at every split.
    pub feature_fraction: f64,
    /// Draw `n` rows with replacement per tree; off means every tree sees all rows.
    pub bootstrap: bool,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams {
            n_trees: 100,
            max_depth: None,
            min_data_in_leaf: 5,
            feature_fraction: 1.0 / 3.0,
            bootstrap: true,
        }
    }
}

impl ForestParams {
    pub fn validate(&self) -> Result<()> {
        if self.n_trees < 1 {
            return Err(CreditError::InvalidParameter("n_trees must be at least 1".into()));
        }
        if !(self.feature_fraction > 0.0 && self.feature_fraction <= 1.0) {
            return Err(CreditError::InvalidParameter(format!(
                "feature_fraction must lie in (0, 1], got {}",
                self.feature_fraction
            )));
        }
        self.cart().validate()
    }

    fn cart(&self) -> CartParams {
        CartParams {
            max_depth: self.max_depth,
            min_data_in_leaf: self.min_data_in_leaf,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    feature_names: Vec<String>,
    trees: Vec<Tree>,
    params: ForestParams,
    seed: u64,
    n_train_rows: usize,
}

/// Training rows of tree `t`, sorted, with bootstrap duplicates.
pub fn tree_rows(n_rows: usize, bootstrap: bool, seed: u64, t: usize) -> Vec<u32> {
    if !bootstrap {
        return (0..n_rows as u32).collect();
    }
    let mut r = rng::stream(seed, rng::FOREST, t as u64);
    let mut rows: Vec<u32> = (0..n_rows).map(|_| r.random_range(0..n_rows as u32)).collect();
    rows.sort_unstable();
    rows
}

pub fn fit_random_forest(d: &Dataset, params: &ForestParams, seed: u64) -> Result<ForestModel> {
    params.validate()?;
    if d.is_empty() {
        return Err(CreditError::InvalidParameter("cannot fit on an empty dataset".into()));
    }
    let m = d.n_cols();
    let k = rng::fraction_count(params.feature_fraction, m);
    let cart = params.cart();
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|t| {
            let rows = tree_rows(d.n_rows(), params.bootstrap, seed, t);
            let mut r = rng::stream(seed, rng::FOREST_FEATURES, t as u64);
            let all: Vec<usize> = (0..m).collect();
            build_tree(d, &rows, &cart, || if k == m { all.clone() } else { rng::sample_sorted(&mut r, m, k) })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ForestModel {
        feature_names: d.schema().names(),
        trees,
        params: params.clone(),
        seed,
        n_train_rows: d.n_rows(),
    })
}

impl ForestModel {
    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn params(&self) -> &ForestParams {
        &self.params
    }

    /// Rows (indices into the training set) that tree `t` was fit on.
    pub fn tree_rows(&self, t: usize) -> Vec<u32> {
        tree_rows(self.n_train_rows, self.params.bootstrap, self.seed, t)
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.check_columns(&self.feature_names)?;
        let n = self.trees.len() as f64;
        Ok((0..d.n_rows())
            .into_par_iter()
            .map(|r| self.trees.iter().map(|t| t.predict_row(|f| d.value(r, f))).sum::<f64>() / n)
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselearners::cart::fit_cart;
    use crate::data::{Schema, Subset};

    fn noisy(n: usize) -> Dataset {
        let x: Vec<f64> = (0..n).map(|i| ((i * 37) % n) as f64).collect();
        let z: Vec<f64> = (0..n).map(|i| ((i * 11) % 7) as f64).collect();
        let y: Vec<f64> = x.iter().zip(&z).map(|(a, b)| (a * 0.2).sin() * 5.0 + b).collect();
        Dataset::from_columns(Schema::numeric(&["x", "z"], Subset::Other, "y").unwrap(), vec![x, z], y).unwrap()
    }

    #[test]
    fn degenerate_forest_is_a_single_cart() {
        let d = noisy(80);
        let p = ForestParams { n_trees: 1, bootstrap: false, feature_fraction: 1.0, max_depth: Some(4), min_data_in_leaf: 3 };
        let f = fit_random_forest(&d, &p, 9).unwrap();
        let c = fit_cart(&d, &CartParams { max_depth: Some(4), min_data_in_leaf: 3 }).unwrap();
        assert_eq!(f.trees()[0], *c.tree());
        assert_eq!(f.predict(&d).unwrap(), c.predict(&d).unwrap());
    }

    #[test]
    fn seeded_and_bootstrapped() {
        let d = noisy(60);
        let p = ForestParams { n_trees: 5, ..Default::default() };
        let a = fit_random_forest(&d, &p, 1).unwrap();
        assert_eq!(a, fit_random_forest(&d, &p, 1).unwrap());
        assert_ne!(a.trees(), fit_random_forest(&d, &p, 2).unwrap().trees());
        let rows = a.tree_rows(0);
        assert_eq!(rows.len(), 60);
        assert!(rows.windows(2).any(|w| w[0] == w[1]), "bootstrap draws repeat rows");
    }

    #[test]
    fn rejects_bad_params() {
        let d = noisy(10);
        assert!(fit_random_forest(&d, &ForestParams { n_trees: 0, ..Default::default() }, 0).is_err());
        assert!(fit_random_forest(&d, &ForestParams { feature_fraction: 0.0, ..Default::default() }, 0).is_err());
    }
}
