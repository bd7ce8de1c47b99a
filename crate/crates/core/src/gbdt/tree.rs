use serde::{Deserialize, Serialize};

use crate::binning::BinnedDataset;
use crate::data::Dataset;
use crate::error::{CreditError, Result};

/// Rows with `x ≤ threshold` (or `bin ≤ bin_threshold`) go to `left`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        /// Present when the tree was grown on binned data.
        bin_threshold: Option<usize>,
        left: usize,
        right: usize,
        gain: f64,
        count: usize,
    },
    Leaf {
        weight: f64,
        count: usize,
    },
}

/// Flat node array, root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    pub fn single_leaf(weight: f64, count: usize) -> Self {
        Tree {
            nodes: vec![Node::Leaf { weight, count }],
        }
    }

    pub fn from_nodes(nodes: Vec<Node>) -> Result<Self> {
        let t = Tree { nodes };
        t.validate()?;
        Ok(t)
    }

    /// Every child index is in range and referenced exactly once; the root is
    /// nobody's child.
    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(CreditError::Format("tree has no nodes".into()));
        }
        let mut seen = vec![false; self.nodes.len()];
        seen[0] = true;
        for n in &self.nodes {
            if let Node::Split { left, right, .. } = *n {
                for c in [left, right] {
                    if c >= self.nodes.len() || seen[c] {
                        return Err(CreditError::Format(format!("invalid child index {c}")));
                    }
                    seen[c] = true;
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(CreditError::Format("tree has unreachable nodes".into()));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    /// Edges on the longest root-to-leaf path; a single leaf has depth 0.
    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    /// Leaf reached by a row, given a per-feature "goes left" test.
    fn leaf_of(&self, mut goes_left: impl FnMut(&Node) -> bool) -> usize {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { .. } => return i,
                Node::Split { left, right, .. } => i = if goes_left(&self.nodes[i]) { left } else { right },
            }
        }
    }

    fn weight(&self, i: usize) -> f64 {
        match self.nodes[i] {
            Node::Leaf { weight, .. } => weight,
            Node::Split { .. } => unreachable!("routing ends at a leaf"),
        }
    }

    /// Routes on raw values against `threshold`.
    pub fn predict_row(&self, value: impl Fn(usize) -> f64) -> f64 {
        let leaf = self.leaf_of(|n| match *n {
            Node::Split { feature, threshold, .. } => value(feature) <= threshold,
            Node::Leaf { .. } => unreachable!(),
        });
        self.weight(leaf)
    }

    /// Routes on bin indices; every split must carry a bin threshold.
    pub fn predict_binned_row(&self, bd: &BinnedDataset, row: usize) -> f64 {
        let leaf = self.leaf_of(|n| match *n {
            Node::Split { feature, bin_threshold, .. } => {
                bd.bin(row, feature) <= bin_threshold.expect("binned routing needs bin thresholds")
            }
            Node::Leaf { .. } => unreachable!(),
        });
        self.weight(leaf)
    }

    pub fn predict(&self, d: &Dataset) -> Vec<f64> {
        (0..d.n_rows()).map(|r| self.predict_row(|f| d.value(r, f))).collect()
    }

    pub(crate) fn uses_bins(&self) -> bool {
        self.nodes
            .iter()
            .all(|n| !matches!(n, Node::Split { bin_threshold: None, .. }))
    }

    /// Same shape, features and thresholds; leaf weights within `tol`.
    pub fn same_structure(&self, other: &Tree, tol: f64) -> bool {
        fn go(a: &[Node], i: usize, b: &[Node], j: usize, tol: f64) -> bool {
            match (&a[i], &b[j]) {
                (Node::Leaf { weight: wa, count: ca }, Node::Leaf { weight: wb, count: cb }) => {
                    ca == cb && (wa - wb).abs() <= tol
                }
                (
                    Node::Split { feature: fa, threshold: ta, left: la, right: ra, count: ca, .. },
                    Node::Split { feature: fb, threshold: tb, left: lb, right: rb, count: cb, .. },
                ) => fa == fb && ta == tb && ca == cb && go(a, *la, b, *lb, tol) && go(a, *ra, b, *rb, tol),
                _ => false,
            }
        }
        go(&self.nodes, 0, &other.nodes, 0, tol)
    }
}
