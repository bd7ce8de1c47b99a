//! Depth-wise CART regression trees on raw values. Each node's rows are kept
//! sorted per feature, so split search is a linear scan and children inherit
//! their order by stable partition.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{CreditError, Result};
use crate::gbdt::{best_split_sorted, mean, Node, SplitConstraints, Threshold, Tree};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartParams {
    /// `None` means unlimited.
    pub max_depth: Option<usize>,
    pub min_data_in_leaf: usize,
}

impl Default for CartParams {
    fn default() -> Self {
        CartParams {
            max_depth: None,
            min_data_in_leaf: 20,
        }
    }
}

impl CartParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_data_in_leaf < 1 {
            return Err(CreditError::InvalidParameter("min_data_in_leaf must be at least 1".into()));
        }
        if self.max_depth == Some(0) {
            return Err(CreditError::InvalidParameter("max_depth must be at least 1 when bounded".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CartModel {
    feature_names: Vec<String>,
    tree: Tree,
}

struct Pending {
    node: usize,
    depth: usize,
    /// `orders[f]`: the node's rows sorted by feature `f`.
    orders: Vec<Vec<u32>>,
}

/// Grows a variance-reduction tree over `rows` (duplicates allowed). Each
/// split considers the features returned by `split_features`, called once per
/// splittable node in breadth-first order.
pub(crate) fn build_tree(
    d: &Dataset,
    rows: &[u32],
    params: &CartParams,
    mut split_features: impl FnMut() -> Vec<usize>,
) -> Result<Tree> {
    params.validate()?;
    if rows.is_empty() {
        return Err(CreditError::InvalidParameter("cannot fit a tree on zero rows".into()));
    }
    let y = d.target();
    // With unit hessians and λ = 0 the gain is half the drop in squared error.
    let offset = mean(y);
    let grad: Vec<f64> = y.iter().map(|v| v - offset).collect();
    let hess = vec![1.0; y.len()];
    let c = SplitConstraints {
        lambda_l2: 0.0,
        min_data_in_leaf: params.min_data_in_leaf,
        min_gain_to_split: 0.0,
    };
    let leaf = |sorted_rows: &[u32]| {
        let ys: Vec<f64> = sorted_rows.iter().map(|&r| y[r as usize]).collect();
        Node::Leaf {
            weight: mean(&ys),
            count: ys.len(),
        }
    };

    let mut root_rows = rows.to_vec();
    root_rows.sort_unstable();
    let orders: Vec<Vec<u32>> = d
        .columns()
        .iter()
        .map(|col| {
            let mut o = root_rows.clone();
            o.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            o
        })
        .collect();
    let mut nodes = vec![leaf(&root_rows)];
    let mut queue = VecDeque::from([Pending { node: 0, depth: 0, orders }]);

    while let Some(p) = queue.pop_front() {
        let n = p.orders[0].len();
        if params.max_depth.is_some_and(|m| p.depth >= m) || n < 2 * params.min_data_in_leaf {
            continue;
        }
        let features = split_features();
        let candidate = best_split_sorted(d, features.iter().map(|&f| (f, p.orders[f].as_slice())), &grad, &hess, &c);
        let Some(s) = candidate else { continue };
        let Threshold::Value(v) = s.threshold else { unreachable!("exact splits carry values") };
        let col = d.column(s.feature);
        let (left, right): (Vec<Vec<u32>>, Vec<Vec<u32>>) = p
            .orders
            .into_iter()
            .map(|o| o.into_iter().partition(|&r| col[r as usize] <= v))
            .unzip();
        let li = nodes.len();
        for orders in [&left, &right] {
            let mut rows = orders[0].clone();
            rows.sort_unstable();
            nodes.push(leaf(&rows));
        }
        nodes[p.node] = Node::Split {
            feature: s.feature,
            threshold: v,
            bin_threshold: None,
            left: li,
            right: li + 1,
            gain: s.gain,
            count: n,
        };
        queue.push_back(Pending { node: li, depth: p.depth + 1, orders: left });
        queue.push_back(Pending { node: li + 1, depth: p.depth + 1, orders: right });
    }
    Tree::from_nodes(nodes)
}

pub fn fit_cart(d: &Dataset, params: &CartParams) -> Result<CartModel> {
    if d.n_rows() < params.min_data_in_leaf {
        return Err(CreditError::InvalidParameter(format!(
            "{} rows is fewer than min_data_in_leaf = {}",
            d.n_rows(),
            params.min_data_in_leaf
        )));
    }
    let rows: Vec<u32> = (0..d.n_rows() as u32).collect();
    let all: Vec<usize> = (0..d.n_cols()).collect();
    let tree = build_tree(d, &rows, params, || all.clone())?;
    Ok(CartModel {
        feature_names: d.schema().names(),
        tree,
    })
}

impl CartModel {
    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn predict(&self, d: &Dataset) -> Result<Vec<f64>> {
        d.check_columns(&self.feature_names)?;
        Ok(self.tree.predict(d))
    }
}
