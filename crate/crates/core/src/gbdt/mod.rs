//! Histogram gradient boosting with leaf-wise growth.

mod booster;
mod grower;
mod histogram;
mod params;
mod split;
mod tree;

pub use booster::{compute_gradients, fit, fit_row_samples, fit_traced, BoostedModel, FitTrace, MODEL_KIND};
pub use grower::{grow_tree_leafwise, grow_tree_leafwise_presorted, grow_tree_leafwise_with_stats, GrowthStats};
pub use histogram::{build_histogram, subtract_histogram, HistBin, Histogram};
pub use params::{BoosterParams, Objective, SplitConstraints};
pub use split::{
    beats, best_split_from_histogram, best_split_over_histograms, best_split_presorted, best_split_presorted_on,
    split_gain, SplitCandidate, Threshold, GAIN_TIE_TOLERANCE,
};
pub use tree::{Node, Tree};

pub(crate) use booster::mean;
pub(crate) use split::best_split_sorted;
