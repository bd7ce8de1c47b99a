//! Split gain and the two split finders: histogram scan (the training path)
//! and exact pre-sorted scan over raw values (CART and the test oracle).
//!
//! Both score a partition with the second-order L2 gain
//! `½·[G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)]`.

use super::histogram::Histogram;
use super::params::SplitConstraints;
use crate::data::Dataset;

/// Gains this close (relative) are ties, resolved by lowest feature then
/// lowest threshold.
pub const GAIN_TIE_TOLERANCE: f64 = 1e-10;

/// A gain below this fraction of its own terms is rounding noise, i.e. zero.
const GAIN_NOISE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// Rows with bin index `≤ b` go left.
    Bin(usize),
    /// Rows with raw value `≤ v` go left.
    Value(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: Threshold,
    pub gain: f64,
    pub left_count: usize,
    pub right_count: usize,
    pub left_grad: f64,
    pub left_hess: f64,
}

/// True when `gain` is better than `incumbent` by more than the tie tolerance.
pub fn beats(gain: f64, incumbent: f64) -> bool {
    gain - incumbent > GAIN_TIE_TOLERANCE * gain.abs().max(incumbent.abs())
}

/// Gain of sending `(left_grad, left_hess)` left out of a node with totals
/// `(node_grad, node_hess)`.
pub fn split_gain(left_grad: f64, left_hess: f64, node_grad: f64, node_hess: f64, lambda: f64) -> f64 {
    let right_grad = node_grad - left_grad;
    let right_hess = node_hess - left_hess;
    let l = left_grad * left_grad / (left_hess + lambda);
    let r = right_grad * right_grad / (right_hess + lambda);
    let p = node_grad * node_grad / (node_hess + lambda);
    let gain = 0.5 * (l + r - p);
    if gain <= GAIN_NOISE_FLOOR * (l + r + p) {
        0.0
    } else {
        gain
    }
}

struct Scan<'a> {
    c: &'a SplitConstraints,
    node_grad: f64,
    node_hess: f64,
    node_count: usize,
    best: Option<SplitCandidate>,
}

impl Scan<'_> {
    fn offer(&mut self, feature: usize, threshold: Threshold, gl: f64, hl: f64, nl: usize) {
        let nr = self.node_count - nl;
        if nl < self.c.min_data_in_leaf || nr < self.c.min_data_in_leaf {
            return;
        }
        let hr = self.node_hess - hl;
        if hl + self.c.lambda_l2 <= 0.0 || hr + self.c.lambda_l2 <= 0.0 {
            return;
        }
        let gain = split_gain(gl, hl, self.node_grad, self.node_hess, self.c.lambda_l2);
        if gain.is_nan() || gain <= self.c.min_gain_to_split {
            return;
        }
        if self.best.is_none_or(|b| beats(gain, b.gain)) {
            self.best = Some(SplitCandidate {
                feature,
                threshold,
                gain,
                left_count: nl,
                right_count: nr,
                left_grad: gl,
                left_hess: hl,
            });
        }
    }
}

/// Best threshold of one feature's histogram, or `None` when no admissible
/// threshold has gain above `min_gain_to_split`. Empty bins never end the left
/// side, so each partition is offered once at its lowest threshold.
pub fn best_split_from_histogram(
    feature: usize,
    h: &Histogram,
    node_grad: f64,
    node_hess: f64,
    c: &SplitConstraints,
) -> Option<SplitCandidate> {
    let mut scan = Scan {
        c,
        node_grad,
        node_hess,
        node_count: h.total_count(),
        best: None,
    };
    scan_histogram(&mut scan, feature, h);
    scan.best
}

fn scan_histogram(scan: &mut Scan<'_>, feature: usize, h: &Histogram) {
    let (mut gl, mut hl, mut nl) = (0.0, 0.0, 0usize);
    let bins = h.bins();
    for (t, b) in bins.iter().enumerate().take(bins.len().saturating_sub(1)) {
        gl += b.grad;
        hl += b.hess;
        nl += b.count as usize;
        if b.count > 0 {
            scan.offer(feature, Threshold::Bin(t), gl, hl, nl);
        }
    }
}

/// Best split across several features' histograms (`hists[i]` belongs to
/// `features[i]`, ascending).
pub fn best_split_over_histograms(
    features: &[usize],
    hists: &[Histogram],
    node_grad: f64,
    node_hess: f64,
    node_count: usize,
    c: &SplitConstraints,
) -> Option<SplitCandidate> {
    let mut scan = Scan {
        c,
        node_grad,
        node_hess,
        node_count,
        best: None,
    };
    for (&f, h) in features.iter().zip(hists) {
        scan_histogram(&mut scan, f, h);
    }
    scan.best
}

pub(crate) fn node_sums(rows: &[u32], grad: &[f64], hess: &[f64]) -> (f64, f64) {
    let mut g = 0.0;
    let mut h = 0.0;
    for &r in rows {
        g += grad[r as usize];
        h += hess[r as usize];
    }
    (g, h)
}

/// Exact split over raw values of every feature.
pub fn best_split_presorted(
    d: &Dataset,
    rows: &[u32],
    grad: &[f64],
    hess: &[f64],
    c: &SplitConstraints,
) -> Option<SplitCandidate> {
    let features: Vec<usize> = (0..d.n_cols()).collect();
    best_split_presorted_on(d, rows, &features, grad, hess, c)
}

/// Exact split restricted to `features` (ascending). Rows are stably sorted by
/// value per feature; thresholds sit on the largest value of the left side.
pub fn best_split_presorted_on(
    d: &Dataset,
    rows: &[u32],
    features: &[usize],
    grad: &[f64],
    hess: &[f64],
    c: &SplitConstraints,
) -> Option<SplitCandidate> {
    let orders: Vec<(usize, Vec<u32>)> = features
        .iter()
        .map(|&f| {
            let col = d.column(f);
            let mut order = rows.to_vec();
            order.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]));
            (f, order)
        })
        .collect();
    best_split_sorted(d, orders.iter().map(|(f, o)| (*f, o.as_slice())), grad, hess, c)
}

/// Exact split over rows already sorted by value, one order per feature.
/// Every order must hold the same rows, in row order within equal values.
pub(crate) fn best_split_sorted<'a>(
    d: &Dataset,
    orders: impl Iterator<Item = (usize, &'a [u32])> + Clone,
    grad: &[f64],
    hess: &[f64],
    c: &SplitConstraints,
) -> Option<SplitCandidate> {
    let first = orders.clone().next()?.1;
    let mut rows = first.to_vec();
    rows.sort_unstable();
    let (node_grad, node_hess) = node_sums(&rows, grad, hess);
    let mut scan = Scan {
        c,
        node_grad,
        node_hess,
        node_count: rows.len(),
        best: None,
    };
    for (f, order) in orders {
        let col = d.column(f);
        let (mut gl, mut hl) = (0.0, 0.0);
        let mut i = 0;
        while i < order.len() {
            let v = col[order[i] as usize];
            let (mut gg, mut gh) = (0.0, 0.0);
            let mut j = i;
            while j < order.len() && col[order[j] as usize] == v {
                gg += grad[order[j] as usize];
                gh += hess[order[j] as usize];
                j += 1;
            }
            gl += gg;
            hl += gh;
            if j < order.len() {
                scan.offer(f, Threshold::Value(v), gl, hl, j);
            }
            i = j;
        }
    }
    scan.best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binning::{apply_bins, fit_bins};
    use crate::data::{Schema, Subset};
    use crate::gbdt::histogram::build_histogram;
    use proptest::prelude::*;

    fn lambda0(min_data: usize) -> SplitConstraints {
        SplitConstraints {
            lambda_l2: 0.0,
            min_data_in_leaf: min_data,
            min_gain_to_split: 0.0,
        }
    }

    fn dataset(cols: Vec<Vec<f64>>) -> Dataset {
        let n = cols[0].len();
        let names: Vec<String> = (0..cols.len()).map(|i| format!("f{i}")).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Dataset::from_columns(Schema::numeric(&refs, Subset::Other, "y").unwrap(), cols, vec![0.0; n]).unwrap()
    }

    fn hist_for(d: &Dataset, rows: &[u32], f: usize, grad: &[f64], hess: &[f64]) -> (Histogram, crate::binning::BinMapper) {
        let m = fit_bins(d, 255).unwrap();
        let bd = apply_bins(d, &m).unwrap();
        (build_histogram(&bd, rows, f, grad, hess), m)
    }

    #[test]
    fn hand_enumerated_split() {
        // Thresholds after bins 0, 1, 2:
        //   t=0: G_L=5,  H_L=1, G_R=-5,  H_R=3 → ½(25 + 25/3 − 0)  = 16.67
        //   t=1: G_L=10, H_L=2, G_R=-10, H_R=2 → ½(50 + 50 − 0)    = 50
        //   t=2: symmetric to t=0                                  = 16.67
        let d = dataset(vec![vec![0.0, 1.0, 2.0, 3.0]]);
        let grad = [5.0, 5.0, -5.0, -5.0];
        let hess = [1.0; 4];
        let (h, _) = hist_for(&d, &[0, 1, 2, 3], 0, &grad, &hess);
        let s = best_split_from_histogram(0, &h, 0.0, 4.0, &lambda0(1)).unwrap();
        assert_eq!(s.threshold, Threshold::Bin(1));
        assert_eq!(s.gain, 50.0);
        assert_eq!((s.left_count, s.right_count), (2, 2));
    }

    #[test]
    fn zero_gradients_never_split() {
        let d = dataset(vec![vec![0.0, 1.0, 2.0, 3.0]]);
        let (h, _) = hist_for(&d, &[0, 1, 2, 3], 0, &[0.0; 4], &[1.0; 4]);
        assert!(best_split_from_histogram(0, &h, 0.0, 4.0, &lambda0(1)).is_none());
        let strict = SplitConstraints { min_gain_to_split: 1e-3, ..lambda0(1) };
        assert!(best_split_from_histogram(0, &h, 0.0, 4.0, &strict).is_none());
    }

    #[test]
    fn min_data_excludes_unbalanced_thresholds() {
        let d = dataset(vec![vec![0.0, 1.0, 2.0, 3.0]]);
        let grad = [9.0, -1.0, -4.0, -4.0];
        let (h, _) = hist_for(&d, &[0, 1, 2, 3], 0, &grad, &[1.0; 4]);
        // Unconstrained, the 1-vs-3 cut wins: ½(81 + 81/3) = 54 vs ½(64/2·2) = 32.
        let free = best_split_from_histogram(0, &h, 0.0, 4.0, &lambda0(1)).unwrap();
        assert_eq!(free.threshold, Threshold::Bin(0));
        assert!((free.gain - 54.0).abs() < 1e-12);
        let two = best_split_from_histogram(0, &h, 0.0, 4.0, &lambda0(2)).unwrap();
        assert_eq!(two.threshold, Threshold::Bin(1));
        assert_eq!(two.gain, 32.0);
        assert!(best_split_from_histogram(0, &h, 0.0, 4.0, &lambda0(3)).is_none());
    }

    #[test]
    fn presorted_finds_the_step() {
        let d = dataset(vec![vec![1.0, 2.0, 3.0, 4.0]]);
        // l2 gradients at the mean prediction 5 for y = [0, 0, 10, 10].
        let grad = [5.0, 5.0, -5.0, -5.0];
        let s = best_split_presorted(&d, &[0, 1, 2, 3], &grad, &[1.0; 4], &lambda0(1)).unwrap();
        assert_eq!(s.threshold, Threshold::Value(2.0));
        assert_eq!(s.gain, 50.0);
    }

    #[test]
    fn constant_feature_is_never_chosen() {
        let d = dataset(vec![vec![7.0; 4], vec![1.0, 2.0, 3.0, 4.0]]);
        let grad = [5.0, 5.0, -5.0, -5.0];
        let s = best_split_presorted(&d, &[0, 1, 2, 3], &grad, &[1.0; 4], &lambda0(1)).unwrap();
        assert_eq!(s.feature, 1);
        assert!(best_split_presorted_on(&d, &[0, 1, 2, 3], &[0], &grad, &[1.0; 4], &lambda0(1)).is_none());
    }

    #[test]
    fn ties_go_to_lowest_feature() {
        let d = dataset(vec![vec![1.0, 2.0, 3.0, 4.0]; 3]);
        let grad = [5.0, 5.0, -5.0, -5.0];
        let s = best_split_presorted(&d, &[0, 1, 2, 3], &grad, &[1.0; 4], &lambda0(1)).unwrap();
        assert_eq!(s.feature, 0);
    }

    #[test]
    fn duplicated_values_are_never_separated() {
        let d = dataset(vec![vec![1.0, 1.0, 2.0, 2.0]]);
        let grad = [10.0, -10.0, 1.0, -1.0];
        let s = best_split_presorted(&d, &[0, 1, 2, 3], &grad, &[1.0; 4], &lambda0(1));
        // Only one admissible partition, {0,1} vs {2,3}, with zero gain.
        assert!(s.is_none());
    }

    /// Exhaustive reference: every (feature, cut between distinct values) pair.
    fn enumerate_all(d: &Dataset, rows: &[u32], grad: &[f64], c: &SplitConstraints) -> Vec<(usize, f64, f64)> {
        let mut out = Vec::new();
        let g: f64 = rows.iter().map(|&r| grad[r as usize]).sum();
        let h = rows.len() as f64;
        for f in 0..d.n_cols() {
            let mut vals: Vec<f64> = rows.iter().map(|&r| d.value(r as usize, f)).collect();
            vals.sort_by(f64::total_cmp);
            vals.dedup();
            for &t in &vals[..vals.len().saturating_sub(1)] {
                let left: Vec<u32> = rows.iter().copied().filter(|&r| d.value(r as usize, f) <= t).collect();
                if left.len() < c.min_data_in_leaf || rows.len() - left.len() < c.min_data_in_leaf {
                    continue;
                }
                let gl: f64 = left.iter().map(|&r| grad[r as usize]).sum();
                let hl = left.len() as f64;
                let gr = g - gl;
                let gain = 0.5 * (gl * gl / (hl + c.lambda_l2) + gr * gr / (h - hl + c.lambda_l2) - g * g / (h + c.lambda_l2));
                out.push((f, t, gain));
            }
        }
        out
    }

    fn small_problem() -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, usize, f64)> {
        (2usize..40, 1usize..4).prop_flat_map(|(n, m)| {
            (
                proptest::collection::vec(proptest::collection::vec((0i32..6).prop_map(f64::from), n), m),
                proptest::collection::vec(-10.0f64..10.0, n),
                1usize..4,
                prop_oneof![Just(0.0), 0.0f64..3.0],
            )
        })
    }

    proptest! {
        #[test]
        fn chosen_gain_dominates_every_admissible_threshold((cols, grad, min_data, lambda) in small_problem()) {
            let d = dataset(cols);
            let rows: Vec<u32> = (0..d.n_rows() as u32).collect();
            let c = SplitConstraints { lambda_l2: lambda, min_data_in_leaf: min_data, min_gain_to_split: 0.0 };
            let hess = vec![1.0; d.n_rows()];
            let all = enumerate_all(&d, &rows, &grad, &c);
            let best_ref = all.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
            match best_split_presorted(&d, &rows, &grad, &hess, &c) {
                Some(s) => {
                    for &(_, _, g) in &all {
                        prop_assert!(s.gain >= g - 1e-9 * g.abs().max(1.0));
                    }
                    prop_assert!(s.gain > 0.0);
                }
                None => prop_assert!(all.is_empty() || best_ref <= 1e-9),
            }
        }

        #[test]
        fn histogram_and_presorted_agree_on_exact_bins((cols, grad, min_data, lambda) in small_problem()) {
            let d = dataset(cols);
            let rows: Vec<u32> = (0..d.n_rows() as u32).collect();
            let c = SplitConstraints { lambda_l2: lambda, min_data_in_leaf: min_data, min_gain_to_split: 0.0 };
            let hess = vec![1.0; d.n_rows()];
            let m = fit_bins(&d, 255).unwrap();
            let bd = apply_bins(&d, &m).unwrap();
            let features: Vec<usize> = (0..d.n_cols()).collect();
            let hists: Vec<Histogram> = features.iter().map(|&f| build_histogram(&bd, &rows, f, &grad, &hess)).collect();
            let (g, h) = node_sums(&rows, &grad, &hess);
            let from_hist = best_split_over_histograms(&features, &hists, g, h, rows.len(), &c);
            let exact = best_split_presorted(&d, &rows, &grad, &hess, &c);
            match (from_hist, exact) {
                (None, None) => {}
                (Some(a), Some(b)) => {
                    prop_assert_eq!(a.feature, b.feature);
                    let Threshold::Bin(t) = a.threshold else { panic!() };
                    prop_assert_eq!(Threshold::Value(m.bin_upper(a.feature, t)), b.threshold);
                    prop_assert_eq!(a.gain, b.gain);
                    prop_assert_eq!(a.left_count, b.left_count);
                }
                (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
            }
        }
    }
}
