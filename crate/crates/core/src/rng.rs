//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by `(seed, purpose, index)`, so results never depend on call order
//! or on how work is scheduled across threads.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const BAGGING: u64 = 1;
pub(crate) const FEATURES: u64 = 2;
pub(crate) const FOREST: u64 = 3;
pub(crate) const SPLIT: u64 = 4;
pub(crate) const FOLDS: u64 = 5;
pub(crate) const SYNTHETIC: u64 = 6;
pub(crate) const FOREST_FEATURES: u64 = 7;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub(crate) fn stream(seed: u64, purpose: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ purpose) ^ index);
    ChaCha8Rng::seed_from_u64(key)
}

/// `k` distinct indices from `0..n`, sorted ascending.
pub(crate) fn sample_sorted(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let mut picked = index::sample(rng, n, k.min(n)).into_vec();
    picked.sort_unstable();
    picked
}

/// `⌈fraction · n⌉`, at least one.
pub(crate) fn fraction_count(fraction: f64, n: usize) -> usize {
    let k = (fraction * n as f64 - 1e-9).ceil() as usize;
    k.clamp(1, n.max(1))
}
