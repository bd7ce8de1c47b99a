//! Fusion strategies: degenerate meta-models, weighting rules, fold
//! bookkeeping and serialization.

use credit_core::baselearners::{FittedLearner, LinearModel, FittedModel};
use credit_core::data::{generate_synthetic, train_test_split, ColumnKind, ColumnSpec, Schema};
use credit_core::fusion::{
    fit_base_models, fit_fusion, fit_fusion_audited, fuse_averaging, fuse_voting, meta_feature_names, voting_weights_from_mae,
};
use credit_core::{evaluate, BoosterParams, CreditError, Dataset, FusionConfig, FusionModel, LearnerParams, LearnerSpec, Strategy, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_gbdt(iterations: usize) -> LearnerSpec {
    let p = BoosterParams { num_iterations: iterations, learning_rate: 0.1, num_leaves: 8, min_data_in_leaf: 10, ..Default::default() };
    LearnerSpec::new(LearnerParams::Gbdt(p), 1).unwrap()
}

fn fixed_meta(coef: [f64; 4]) -> FittedLearner {
    FittedLearner::from_linear(LinearModel::from_coefficients(meta_feature_names(), coef.to_vec(), 0.0).unwrap())
}

#[test]
fn quarter_weights_reproduce_averaging() {
    let d = generate_synthetic(600, 1);
    for strategy in [Strategy::Blending, Strategy::Stacking] {
        let m = fit_fusion(&d, &FusionConfig::new(strategy, 2), &small_gbdt(20)).unwrap();
        let avg = fuse_averaging(m.base_models(), &d).unwrap();
        let fixed = m.with_meta_model(fixed_meta([0.25; 4])).unwrap().predict(&d).unwrap();
        for (a, b) in avg.iter().zip(&fixed) {
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
        }
    }
}

#[test]
fn identity_meta_returns_the_first_base() {
    let d = generate_synthetic(500, 2);
    let m = fit_fusion(&d, &FusionConfig::new(Strategy::Stacking, 3), &small_gbdt(15)).unwrap();
    let first = m.base_models().values().next().unwrap();
    let want = first.predict(&d.subset(Subset::ALL[0])).unwrap();
    let got = m.with_meta_model(fixed_meta([1.0, 0.0, 0.0, 0.0])).unwrap().predict(&d).unwrap();
    assert_eq!(got, want);
}

#[test]
fn uniform_voting_is_averaging_exactly() {
    let d = generate_synthetic(400, 3);
    let models = fit_base_models(&d, &small_gbdt(10)).unwrap();
    assert_eq!(fuse_voting(&models, &[0.25; 4], &d).unwrap(), fuse_averaging(&models, &d).unwrap());
}

#[test]
fn inverse_mae_weights() {
    let w = voting_weights_from_mae(&[1.0, 2.0, 4.0, 8.0]);
    let want = [8.0 / 15.0, 4.0 / 15.0, 2.0 / 15.0, 1.0 / 15.0];
    for (a, b) in w.iter().zip(want) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(voting_weights_from_mae(&[3.0, 3.0]), [0.5, 0.5]);
    assert_eq!(voting_weights_from_mae(&[0.0, 1.0, 0.0, 2.0]), [0.5, 0.0, 0.5, 0.0]);
}

#[test]
fn fitted_voting_weights_are_a_distribution() {
    let d = generate_synthetic(800, 4);
    let m = fit_fusion(&d, &FusionConfig::new(Strategy::Voting, 4), &small_gbdt(20)).unwrap();
    let w = m.weights().unwrap();
    assert_eq!(w.len(), 4);
    assert!(w.iter().all(|&x| x >= 0.0));
    assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

/// Consumer columns carry the whole signal; every other column is noise.
fn planted_consumer(n: usize, seed: u64) -> Dataset {
    let schema = credit_core::canonical_schema();
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let cols: Vec<Vec<f64>> = (0..schema.len()).map(|_| (0..n).map(|_| f64::from(r.random_range(0..20u8))).collect()).collect();
    let j = schema.index_of("top_up_amount").unwrap();
    let y = cols[j].iter().map(|v| 3.0 * v + 100.0).collect();
    Dataset::from_columns(schema, cols, y).unwrap()
}

#[test]
fn blending_concentrates_on_the_informative_base() {
    let d = planted_consumer(600, 5);
    let (m, audit) = fit_fusion_audited(&d, &FusionConfig::new(Strategy::Blending, 5), &small_gbdt(40)).unwrap();
    let meta = audit.meta_features.unwrap();
    assert_eq!((meta.width(), meta.n_rows()), (4, 120));
    let FittedModel::Linear(lm) = m.meta_model().unwrap().model() else { panic!("linear meta expected") };
    let coef = lm.standardized_coefficients();
    let top = (0..4).max_by(|&a, &b| coef[a].abs().total_cmp(&coef[b].abs())).unwrap();
    assert_eq!(Subset::ALL[top], Subset::ConsumerCapacity, "{coef:?}");
}

#[test]
fn stacking_meta_features_are_out_of_fold() {
    let d = generate_synthetic(300, 6);
    let (_, mut audit) = fit_fusion_audited(&d, &FusionConfig::new(Strategy::Stacking, 6), &small_gbdt(5)).unwrap();
    audit.verify_out_of_fold().unwrap();
    let meta = audit.meta_features.as_ref().unwrap();
    assert_eq!(meta.n_rows(), 300);
    // Every row sits in exactly one fold, and no fold model saw its own fold.
    for (f, ids) in audit.fold_train_ids.iter().enumerate() {
        for rows in ids.values() {
            for (i, id) in meta.row_ids.iter().enumerate() {
                assert_eq!(rows.contains(id), audit.fold_of[i] != f);
            }
        }
    }
    // Tampering is caught.
    let leaked = meta.row_ids[0].clone();
    let fold = audit.fold_of[0];
    audit.fold_train_ids[fold].get_mut(&Subset::Other).unwrap().push(leaked);
    assert!(audit.verify_out_of_fold().is_err());
}

#[test]
fn two_fold_mean_predictor_sees_only_the_other_fold() {
    let d = generate_synthetic(101, 7);
    let config = FusionConfig { n_folds: 2, ..FusionConfig::new(Strategy::Stacking, 7) };
    let (_, audit) = fit_fusion_audited(&d, &config, &small_gbdt(0)).unwrap();
    let meta = audit.meta_features.unwrap();
    let y = d.target();
    let fold_mean = |f: usize| {
        let ys: Vec<f64> = (0..101).filter(|&i| audit.fold_of[i] == f).map(|i| y[i]).collect();
        ys.iter().sum::<f64>() / ys.len() as f64
    };
    for i in 0..101 {
        let other = 1 - audit.fold_of[i];
        for col in &meta.columns {
            assert!((col[i] - fold_mean(other)).abs() < 1e-9);
        }
    }
}

#[test]
fn consumer_subset_beats_location_subset() {
    let d = generate_synthetic(3000, 42);
    let (train, test) = train_test_split(&d, 0.2, 42).unwrap();
    let models = fit_base_models(&train, &small_gbdt(100)).unwrap();
    let r2 = |s: Subset| evaluate(test.target(), &models[&s].predict(&test.subset(s)).unwrap()).unwrap().r2;
    assert!(r2(Subset::ConsumerCapacity) > r2(Subset::LocationTrajectory));
}

#[test]
fn base_models_reject_full_width_input() {
    let d = generate_synthetic(200, 8);
    let models = fit_base_models(&d, &small_gbdt(3)).unwrap();
    assert_eq!(models.len(), 4);
    for m in models.values() {
        assert!(matches!(m.predict(&d), Err(CreditError::ColumnMismatch { .. })));
    }
}

#[test]
fn every_strategy_is_deterministic_and_round_trips() {
    let d = generate_synthetic(400, 9);
    for strategy in Strategy::ALL {
        let c = FusionConfig::new(strategy, 9);
        let a = fit_fusion(&d, &c, &small_gbdt(10)).unwrap();
        assert_eq!(a, fit_fusion(&d, &c, &small_gbdt(10)).unwrap());
        let p = a.predict(&d).unwrap();
        assert_eq!(p, a.predict(&d).unwrap());
        let back = FusionModel::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back.predict(&d).unwrap(), p);
    }
}

#[test]
fn predicting_without_a_subset_names_the_missing_columns() {
    let d = generate_synthetic(200, 10);
    let m = fit_fusion(&d, &FusionConfig::new(Strategy::Averaging, 1), &small_gbdt(3)).unwrap();
    let keep: Vec<usize> = (0..d.n_cols()).filter(|&j| d.schema().columns()[j].subset != Subset::AppBehavior).collect();
    let err = m.predict(&d.select_columns(&keep)).unwrap_err();
    let CreditError::ColumnMismatch { missing, .. } = &err else { panic!("{err}") };
    assert_eq!(missing.len(), 7);
    assert!(err.to_string().contains("finance_app_count"));
}

#[test]
fn schema_without_a_subset_cannot_fuse() {
    let schema = Schema::new(vec![ColumnSpec::new("a", ColumnKind::Numeric, Subset::Other)], "y").unwrap();
    let d = Dataset::from_columns(schema, vec![vec![1.0; 30]], vec![2.0; 30]).unwrap();
    assert!(fit_fusion(&d, &FusionConfig::new(Strategy::Averaging, 1), &small_gbdt(1)).is_err());
}
