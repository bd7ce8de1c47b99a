//! Loading, preprocessing, splitting and the synthetic generator, exercised
//! through files on disk.

use std::fs;

use credit_core::data::{
    generate_with_signal, load_csv, preprocess, split_indices, train_test_split, write_csv, ColumnKind, ColumnSpec,
    PreprocessConfig, Preprocessor, Schema, Subset,
};
use credit_core::{canonical_schema, CreditError, Dataset};

fn schema3() -> Schema {
    Schema::new(
        vec![
            ColumnSpec::new("age", ColumnKind::Numeric, Subset::Other),
            ColumnSpec::new("blk_list_flag", ColumnKind::Flag, Subset::Other),
            ColumnSpec::new("top_up_amount", ColumnKind::Numeric, Subset::ConsumerCapacity),
        ],
        "score",
    )
    .unwrap()
}

fn write_tmp(text: &str) -> (tempfile::TempDir, std::path::PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.csv");
    fs::write(&path, text).unwrap();
    (dir, path)
}

#[test]
fn loads_rows_in_any_column_order() {
    let (_d, path) = write_tmp("id,score,top_up_amount,age,blk_list_flag\na,600,10.5,30,0\nb,610,,41,1\nc,590,3,22,0\n");
    let d = load_csv(&path, &schema3()).unwrap();
    assert_eq!(d.n_rows(), 3);
    assert_eq!(d.ids(), ["a", "b", "c"]);
    assert_eq!(d.column_by_name("age").unwrap(), [30.0, 41.0, 22.0]);
    assert!(d.column_by_name("top_up_amount").unwrap()[1].is_nan());
    assert_eq!(d.target(), [600.0, 610.0, 590.0]);
}

#[test]
fn missing_column_is_a_schema_error() {
    let (_d, path) = write_tmp("score,blk_list_flag,top_up_amount\n600,0,1\n");
    let err = load_csv(&path, &schema3()).unwrap_err();
    assert!(matches!(err, CreditError::ColumnMismatch { .. }), "{err}");
    assert!(err.to_string().contains("age"));
}

#[test]
fn bad_cell_names_row_and_column() {
    let (_d, path) = write_tmp("score,age,blk_list_flag,top_up_amount\n600,30,0,1\n610,abc,1,2\n");
    match load_csv(&path, &schema3()).unwrap_err() {
        CreditError::Parse { row, column, value } => {
            assert_eq!((row, column.as_str(), value.as_str()), (2, "age", "abc"));
        }
        e => panic!("unexpected {e}"),
    }
}

#[test]
fn written_files_load_back_identically() {
    let (d, _) = generate_with_signal(50, 3);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    write_csv(&d, &path).unwrap();
    assert_eq!(load_csv(&path, &canonical_schema()).unwrap(), d);
}

#[test]
fn imputation_and_flag_coercion() {
    let schema = Schema::new(
        vec![
            ColumnSpec::new("x", ColumnKind::Numeric, Subset::Other),
            ColumnSpec::new("f", ColumnKind::Flag, Subset::Other),
        ],
        "y",
    )
    .unwrap();
    let d = Dataset::from_columns(schema, vec![vec![1.0, f64::NAN, 3.0], vec![0.0, 2.0, 1.0]], vec![1.0; 3]).unwrap();
    let (out, summary) = Preprocessor::fit(&d, &PreprocessConfig::default()).unwrap().transform(&d).unwrap();
    assert_eq!(out.column(0), [1.0, 2.0, 3.0]);
    assert_eq!(out.column(1), [0.0, 1.0, 1.0]);
    assert_eq!((summary.n_imputed, summary.n_flags_coerced), (1, 1));
}

#[test]
fn clipping_uses_nearest_rank_percentiles_and_is_idempotent() {
    let schema = Schema::numeric(&["x"], Subset::Other, "y").unwrap();
    let x: Vec<f64> = (0..301).map(|i| f64::from((i * 37) % 301)).collect();
    let d = Dataset::from_columns(schema, vec![x], vec![0.0; 301]).unwrap();
    let config = PreprocessConfig { clip_outliers: true };
    let once = preprocess(&d, &config).unwrap();
    // 0.01·300 = 3 and 0.99·300 = 297 on the sorted 0..=300 values.
    assert_eq!(once.column(0).iter().copied().fold(f64::INFINITY, f64::min), 3.0);
    assert_eq!(once.column(0).iter().copied().fold(f64::NEG_INFINITY, f64::max), 297.0);
    assert_eq!(preprocess(&once, &config).unwrap(), once);
}

#[test]
fn split_partitions_rows_in_order() {
    let (train, test) = split_indices(10, 0.3, 7).unwrap();
    assert_eq!((train.len(), test.len()), (7, 3));
    let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
    all.sort_unstable();
    assert_eq!(all, (0..10).collect::<Vec<_>>());
    assert!(train.windows(2).all(|w| w[0] < w[1]) && test.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(split_indices(10, 0.3, 7).unwrap(), (train, test));
    assert_eq!(split_indices(2, 0.01, 1).unwrap().0.len(), 1);
    assert!(split_indices(10, 1.0, 1).is_err());
    assert!(split_indices(1, 0.5, 1).is_err());

    let (d, _) = generate_with_signal(100, 1);
    let (a, b) = train_test_split(&d, 0.2, 5).unwrap();
    assert_eq!((a.n_rows(), b.n_rows()), (80, 20));
    assert!(b.ids().iter().all(|id| !a.ids().contains(id)));
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn generated_target_tracks_the_planted_signal() {
    let (d, signal) = generate_with_signal(10_000, 42);
    assert!(pearson(d.target(), &signal) > 0.8);
    for (spec, col) in d.schema().columns().iter().zip(d.columns()) {
        if spec.kind == ColumnKind::Flag {
            assert!(col.iter().all(|&v| v == 0.0 || v == 1.0), "{}", spec.name);
        }
    }
}
