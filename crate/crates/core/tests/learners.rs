//! CART, forest and boosting behaviour on small fixtures, including
//! independence from the worker count.

use credit_core::baselearners::{fit_cart, fit_random_forest, CartParams, ForestParams};
use credit_core::data::generate_synthetic;
use credit_core::gbdt::{self, Node};
use credit_core::{BoosterParams, FusionConfig, LearnerKind, LearnerSpec, Strategy};

mod common;

fn sse(ys: &[f64]) -> f64 {
    let m = ys.iter().sum::<f64>() / ys.len() as f64;
    ys.iter().map(|y| (y - m) * (y - m)).sum()
}

#[test]
fn depth_one_cart_finds_the_exhaustive_best_cut() {
    for seed in 0..20 {
        let d = common::random_dataset(seed, 60, 3, 12);
        let min_leaf = 3;
        let m = fit_cart(&d, &CartParams { max_depth: Some(1), min_data_in_leaf: min_leaf }).unwrap();
        // Enumerate every (feature, observed value) cut.
        let mut best = (f64::INFINITY, 0, 0.0);
        for f in 0..3 {
            let mut values: Vec<f64> = d.column(f).to_vec();
            values.sort_by(f64::total_cmp);
            values.dedup();
            for &t in &values {
                let (l, r): (Vec<f64>, Vec<f64>) = (0..60).map(|i| (d.value(i, f), d.target()[i])).fold((vec![], vec![]), |(mut l, mut r), (x, y)| {
                    if x <= t { l.push(y) } else { r.push(y) }
                    (l, r)
                });
                if l.len() < min_leaf || r.len() < min_leaf {
                    continue;
                }
                let cost = sse(&l) + sse(&r);
                if cost < best.0 - 1e-9 {
                    best = (cost, f, t);
                }
            }
        }
        match m.tree().nodes()[0] {
            Node::Split { feature, threshold, .. } => {
                assert_eq!((feature, threshold), (best.1, best.2), "seed {seed}");
                let leaf_sse: f64 = m
                    .predict(&d)
                    .unwrap()
                    .iter()
                    .zip(d.target())
                    .map(|(p, y)| (p - y) * (p - y))
                    .sum();
                assert!((leaf_sse - best.0).abs() < 1e-6);
            }
            Node::Leaf { .. } => assert!(best.0.is_infinite() || best.0 >= sse(d.target()) - 1e-9),
        }
    }
}

#[test]
fn forest_predictions_vary_less_than_single_trees() {
    let train = generate_synthetic(600, 5).subset(credit_core::Subset::Other);
    let test = generate_synthetic(200, 6).subset(credit_core::Subset::Other);
    let params = |n_trees| ForestParams { n_trees, ..ForestParams::default() };
    let spread = |n_trees: usize| {
        let preds: Vec<Vec<f64>> = (0..20).map(|s| fit_random_forest(&train, &params(n_trees), s).unwrap().predict(&test).unwrap()).collect();
        (0..test.n_rows())
            .map(|i| {
                let col: Vec<f64> = preds.iter().map(|p| p[i]).collect();
                sse(&col) / 20.0
            })
            .sum::<f64>()
            / test.n_rows() as f64
    };
    let (forest, single) = (spread(30), spread(1));
    assert!(forest < single, "forest variance {forest} vs single tree {single}");
}

fn on_threads<T: Send>(n: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f)
}

#[test]
fn fits_do_not_depend_on_thread_count() {
    let d = generate_synthetic(1500, 8);
    let booster = BoosterParams {
        num_iterations: 20,
        feature_fraction: 0.7,
        bagging_fraction: 0.8,
        bagging_freq: 2,
        seed: 3,
        ..Default::default()
    };
    let run = || {
        let g = gbdt::fit(&d, &booster).unwrap().to_json().unwrap();
        let rf = LearnerSpec::default_for(LearnerKind::RandomForest, 4).fit(&d).unwrap().to_json().unwrap();
        let spec = LearnerSpec::default_for(LearnerKind::Gbdt, 4);
        let st = credit_core::fusion::fit_fusion(&d, &FusionConfig::new(Strategy::Stacking, 4), &spec).unwrap().to_json().unwrap();
        (g, rf, st)
    };
    assert_eq!(on_threads(1, run), on_threads(4, run));
}

#[test]
fn bagging_and_column_sampling_follow_the_seed() {
    let d = generate_synthetic(800, 2);
    let p = |seed| BoosterParams { num_iterations: 10, feature_fraction: 0.5, bagging_fraction: 0.7, bagging_freq: 1, seed, ..Default::default() };
    let a = gbdt::fit(&d, &p(1)).unwrap();
    assert_eq!(a, gbdt::fit(&d, &p(1)).unwrap());
    assert_ne!(a.predict(&d).unwrap(), gbdt::fit(&d, &p(2)).unwrap().predict(&d).unwrap());
}
