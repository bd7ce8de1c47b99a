//! Leaf-wise (best-first) tree growth.
//!
//! One loop serves two split finders: the histogram finder used for training
//! and the exact pre-sorted finder used as its oracle. At each step the open
//! leaf with the largest gain is split. For histograms, the smaller child is
//! built directly and the larger one is `parent − smaller`.

use rayon::prelude::*;

use super::histogram::{build_histogram, subtract_histogram, Histogram};
use super::params::{BoosterParams, SplitConstraints};
use super::split::{beats, best_split_over_histograms, best_split_presorted_on, node_sums, SplitCandidate, Threshold};
use super::tree::{Node, Tree};
use crate::binning::BinnedDataset;
use crate::data::Dataset;
use crate::error::Result;

/// Histogram work below this many row-feature cells stays on one thread.
const PARALLEL_CELLS: usize = 1 << 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GrowthStats {
    /// Per-feature histograms accumulated from rows.
    pub direct_builds: usize,
    /// Per-feature histograms obtained as parent minus sibling.
    pub subtracted: usize,
    /// Row visits spent in direct builds, summed over features.
    pub rows_scanned: usize,
    pub splits: usize,
}

trait Finder {
    type Cache;
    fn root(&mut self, rows: &[u32]) -> Result<Self::Cache>;
    fn find(&self, cache: &Self::Cache, rows: &[u32], g: f64, h: f64) -> Option<SplitCandidate>;
    fn goes_left(&self, row: u32, s: &SplitCandidate) -> bool;
    /// Returns `(left, right)` caches.
    fn children(&mut self, parent: Self::Cache, small: &[u32], small_is_left: bool) -> Result<(Self::Cache, Self::Cache)>;
    /// Raw threshold and bin threshold stored in the split node.
    fn resolve(&self, s: &SplitCandidate) -> (f64, Option<usize>);
}

struct HistogramFinder<'a> {
    bd: &'a BinnedDataset,
    features: &'a [usize],
    grad: &'a [f64],
    hess: &'a [f64],
    c: SplitConstraints,
    stats: GrowthStats,
}

impl HistogramFinder<'_> {
    fn build_all(&mut self, rows: &[u32]) -> Vec<Histogram> {
        self.stats.direct_builds += self.features.len();
        self.stats.rows_scanned += rows.len() * self.features.len();
        let build = |&f: &usize| build_histogram(self.bd, rows, f, self.grad, self.hess);
        if rows.len() * self.features.len() >= PARALLEL_CELLS {
            self.features.par_iter().map(build).collect()
        } else {
            self.features.iter().map(build).collect()
        }
    }
}

impl Finder for HistogramFinder<'_> {
    type Cache = Vec<Histogram>;

    fn root(&mut self, rows: &[u32]) -> Result<Vec<Histogram>> {
        Ok(self.build_all(rows))
    }

    fn find(&self, cache: &Vec<Histogram>, rows: &[u32], g: f64, h: f64) -> Option<SplitCandidate> {
        best_split_over_histograms(self.features, cache, g, h, rows.len(), &self.c)
    }

    fn goes_left(&self, row: u32, s: &SplitCandidate) -> bool {
        let Threshold::Bin(t) = s.threshold else { unreachable!("histogram splits carry bins") };
        self.bd.bin(row as usize, s.feature) <= t
    }

    fn children(&mut self, parent: Vec<Histogram>, small: &[u32], small_is_left: bool) -> Result<(Vec<Histogram>, Vec<Histogram>)> {
        let direct = self.build_all(small);
        let derived = parent
            .iter()
            .zip(&direct)
            .map(|(p, s)| subtract_histogram(p, s))
            .collect::<Result<Vec<_>>>()?;
        self.stats.subtracted += derived.len();
        Ok(if small_is_left { (direct, derived) } else { (derived, direct) })
    }

    fn resolve(&self, s: &SplitCandidate) -> (f64, Option<usize>) {
        let Threshold::Bin(t) = s.threshold else { unreachable!("histogram splits carry bins") };
        (self.bd.mapper().bin_upper(s.feature, t), Some(t))
    }
}

struct PresortedFinder<'a> {
    d: &'a Dataset,
    features: &'a [usize],
    grad: &'a [f64],
    hess: &'a [f64],
    c: SplitConstraints,
}

impl Finder for PresortedFinder<'_> {
    type Cache = ();

    fn root(&mut self, _rows: &[u32]) -> Result<()> {
        Ok(())
    }

    fn find(&self, _: &(), rows: &[u32], _g: f64, _h: f64) -> Option<SplitCandidate> {
        best_split_presorted_on(self.d, rows, self.features, self.grad, self.hess, &self.c)
    }

    fn goes_left(&self, row: u32, s: &SplitCandidate) -> bool {
        let Threshold::Value(v) = s.threshold else { unreachable!("presorted splits carry values") };
        self.d.value(row as usize, s.feature) <= v
    }

    fn children(&mut self, _: (), _: &[u32], _: bool) -> Result<((), ())> {
        Ok(((), ()))
    }

    fn resolve(&self, s: &SplitCandidate) -> (f64, Option<usize>) {
        let Threshold::Value(v) = s.threshold else { unreachable!("presorted splits carry values") };
        (v, None)
    }
}

struct OpenLeaf<C> {
    node: usize,
    rows: Vec<u32>,
    depth: usize,
    cache: Option<C>,
    split: Option<SplitCandidate>,
}

fn grow<F: Finder>(finder: &mut F, rows: Vec<u32>, grad: &[f64], hess: &[f64], params: &BoosterParams) -> Result<Tree> {
    let lambda = params.lambda_l2;
    let lr = params.learning_rate;
    let splittable = |depth: usize, n: usize| {
        params.num_leaves >= 2 && params.max_depth.is_none_or(|m| depth < m) && n >= 2 * params.min_data_in_leaf
    };
    let leaf = |rows: &[u32]| {
        let (g, h) = node_sums(rows, grad, hess);
        (Node::Leaf { weight: -g / (h + lambda) * lr, count: rows.len() }, g, h)
    };

    let (root_leaf, g, h) = leaf(&rows);
    let mut nodes = vec![root_leaf];
    let mut open = Vec::new();
    if splittable(0, rows.len()) {
        let cache = finder.root(&rows)?;
        let split = finder.find(&cache, &rows, g, h);
        open.push(OpenLeaf { node: 0, rows, depth: 0, cache: Some(cache), split });
    }
    let mut n_leaves = 1;

    while n_leaves < params.num_leaves {
        // Open leaves stay in creation order, so strict improvement keeps the
        // earliest leaf on ties.
        let mut best: Option<(usize, f64)> = None;
        for (i, o) in open.iter().enumerate() {
            if let Some(s) = &o.split {
                if best.is_none_or(|(_, g)| beats(s.gain, g)) {
                    best = Some((i, s.gain));
                }
            }
        }
        let Some((i, _)) = best else { break };
        let o = open.remove(i);
        let s = o.split.expect("chosen leaf has a split");

        let (left_rows, right_rows): (Vec<u32>, Vec<u32>) = o.rows.iter().partition(|&&r| finder.goes_left(r, &s));
        debug_assert_eq!((left_rows.len(), right_rows.len()), (s.left_count, s.right_count));
        let small_is_left = left_rows.len() <= right_rows.len();
        let small = if small_is_left { &left_rows } else { &right_rows };
        let parent_cache = o.cache.expect("split leaves keep their cache");
        let (left_cache, right_cache) = finder.children(parent_cache, small, small_is_left)?;

        let (threshold, bin_threshold) = finder.resolve(&s);
        let left = nodes.len();
        let right = left + 1;
        nodes[o.node] = Node::Split {
            feature: s.feature,
            threshold,
            bin_threshold,
            left,
            right,
            gain: s.gain,
            count: o.rows.len(),
        };
        for (child_rows, cache) in [(left_rows, left_cache), (right_rows, right_cache)] {
            let (node, g, h) = leaf(&child_rows);
            let id = nodes.len();
            nodes.push(node);
            let depth = o.depth + 1;
            if splittable(depth, child_rows.len()) {
                let split = finder.find(&cache, &child_rows, g, h);
                let cache = split.is_some().then_some(cache);
                open.push(OpenLeaf { node: id, rows: child_rows, depth, cache, split });
            }
        }
        n_leaves += 1;
    }
    Tree::from_nodes(nodes)
}

fn all_features(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// Grows one tree over `rows` of `bd` using every feature.
pub fn grow_tree_leafwise(bd: &BinnedDataset, rows: &[u32], grad: &[f64], hess: &[f64], params: &BoosterParams) -> Result<Tree> {
    let features = all_features(bd.n_features());
    Ok(grow_tree_leafwise_with_stats(bd, rows, &features, grad, hess, params)?.0)
}

/// As [`grow_tree_leafwise`], restricted to `features` (ascending), also
/// reporting histogram work.
pub fn grow_tree_leafwise_with_stats(
    bd: &BinnedDataset,
    rows: &[u32],
    features: &[usize],
    grad: &[f64],
    hess: &[f64],
    params: &BoosterParams,
) -> Result<(Tree, GrowthStats)> {
    let mut finder = HistogramFinder {
        bd,
        features,
        grad,
        hess,
        c: params.split_constraints(),
        stats: GrowthStats::default(),
    };
    let tree = grow(&mut finder, rows.to_vec(), grad, hess, params)?;
    let mut stats = finder.stats;
    stats.splits = tree.nodes().len() / 2;
    Ok((tree, stats))
}

/// The same leaf-wise loop driven by the exact pre-sorted finder on raw values.
pub fn grow_tree_leafwise_presorted(
    d: &Dataset,
    rows: &[u32],
    features: &[usize],
    grad: &[f64],
    hess: &[f64],
    params: &BoosterParams,
) -> Result<Tree> {
    let mut finder = PresortedFinder {
        d,
        features,
        grad,
        hess,
        c: params.split_constraints(),
    };
    grow(&mut finder, rows.to_vec(), grad, hess, params)
}
