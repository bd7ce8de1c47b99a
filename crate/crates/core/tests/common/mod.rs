#![allow(dead_code)]

use credit_core::data::{Schema, Subset};
use credit_core::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn names(m: usize) -> Vec<String> {
    (0..m).map(|j| format!("x{j}")).collect()
}

pub fn dataset(columns: Vec<Vec<f64>>, target: Vec<f64>) -> Dataset {
    let n = names(columns.len());
    let refs: Vec<&str> = n.iter().map(String::as_str).collect();
    Dataset::from_columns(Schema::numeric(&refs, Subset::Other, "y").unwrap(), columns, target).unwrap()
}

/// Integer-valued features with at most `levels` distinct values each and a
/// noisy nonlinear target.
pub fn random_dataset(seed: u64, n: usize, m: usize, levels: u32) -> Dataset {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let columns: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..n).map(|_| f64::from(r.random_range(0..levels))).collect())
        .collect();
    let target = (0..n)
        .map(|i| {
            let x0 = columns[0][i];
            let x1 = columns.get(1).map_or(0.0, |c| c[i]);
            (x0 * 0.7).sin() * 5.0 + if x1 > f64::from(levels) / 2.0 { 3.0 } else { -1.0 } + r.random_range(-1.0..1.0)
        })
        .collect();
    dataset(columns, target)
}
