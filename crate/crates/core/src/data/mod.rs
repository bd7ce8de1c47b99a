//! Operator feature schema, the columnar [`Dataset`] container, and the
//! row/column partitioning used throughout the pipeline.

mod io;
mod preprocess;
mod synthetic;

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CreditError, Result};
use crate::rng;

pub use io::{load_csv, load_csv_unlabeled, parse_schema, read_schema_file, render_schema, write_csv};
pub use preprocess::{preprocess, PreprocessConfig, PreprocessSummary, Preprocessor};
pub use synthetic::{generate_synthetic, generate_with, generate_with_signal, planted_signal, SyntheticDesign};

/// Name of the id column accepted (and written) alongside the schema columns.
pub const ID_COLUMN: &str = "id";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Count,
    Flag,
}

/// The four user-portrait dimensions the predictors are partitioned into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Subset {
    ConsumerCapacity,
    LocationTrajectory,
    AppBehavior,
    Other,
}

impl Subset {
    pub const ALL: [Subset; 4] = [
        Subset::ConsumerCapacity,
        Subset::LocationTrajectory,
        Subset::AppBehavior,
        Subset::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Subset::ConsumerCapacity => "consumer_capacity",
            Subset::LocationTrajectory => "location_trajectory",
            Subset::AppBehavior => "app_behavior",
            Subset::Other => "other",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Subset {
    type Err = CreditError;

    fn from_str(s: &str) -> Result<Self> {
        Subset::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| CreditError::SchemaMismatch(format!("unknown subset `{s}`")))
    }
}

impl ColumnKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ColumnKind::Numeric => "numeric",
            ColumnKind::Count => "count",
            ColumnKind::Flag => "flag",
        }
    }
}

impl FromStr for ColumnKind {
    type Err = CreditError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "numeric" => Ok(ColumnKind::Numeric),
            "count" => Ok(ColumnKind::Count),
            "flag" => Ok(ColumnKind::Flag),
            other => Err(CreditError::SchemaMismatch(format!("unknown column kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
    pub subset: Subset,
}

impl ColumnSpec {
    pub fn new(name: impl Into<String>, kind: ColumnKind, subset: Subset) -> Self {
        ColumnSpec {
            name: name.into(),
            kind,
            subset,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    columns: Vec<ColumnSpec>,
    target_name: String,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSpec>, target_name: impl Into<String>) -> Result<Self> {
        let target_name = target_name.into();
        let mut seen = HashSet::new();
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(CreditError::SchemaMismatch(format!("duplicate column `{}`", c.name)));
            }
            if c.name == target_name {
                return Err(CreditError::SchemaMismatch(format!(
                    "target `{target_name}` cannot also be a predictor"
                )));
            }
            if c.name == ID_COLUMN {
                return Err(CreditError::SchemaMismatch("`id` is reserved".into()));
            }
        }
        Ok(Schema {
            columns,
            target_name,
        })
    }

    /// All-numeric schema used for meta-feature matrices and tests.
    pub fn numeric(names: &[&str], subset: Subset, target_name: &str) -> Result<Self> {
        Schema::new(
            names
                .iter()
                .map(|n| ColumnSpec::new(*n, ColumnKind::Numeric, subset))
                .collect(),
            target_name,
        )
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn target_name(&self) -> &str {
        &self.target_name
    }

    pub fn names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn column(&self, name: &str) -> Option<&ColumnSpec> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Column indices belonging to `subset`, in schema order.
    pub fn subset_indices(&self, subset: Subset) -> Vec<usize> {
        self.columns
            .iter()
            .enumerate()
            .filter(|(_, c)| c.subset == subset)
            .map(|(i, _)| i)
            .collect()
    }

    fn project(&self, indices: &[usize]) -> Schema {
        Schema {
            columns: indices.iter().map(|&i| self.columns[i].clone()).collect(),
            target_name: self.target_name.clone(),
        }
    }
}

/// The 28 predictive fields of the operator table (everything except `id`
/// and the `score` target), each tagged with its portrait subset.
pub fn canonical_schema() -> Schema {
    use ColumnKind::*;
    use Subset::*;
    let cols: [(&str, ColumnKind, Subset); 28] = [
        ("age", Numeric, Other),
        ("net_age_till_now", Numeric, Other),
        ("top_up_month_diff", Numeric, ConsumerCapacity),
        ("top_up_amount", Numeric, ConsumerCapacity),
        ("recent_6month_avg_use", Numeric, ConsumerCapacity),
        ("total_account_fee", Numeric, ConsumerCapacity),
        ("curr_month_balance", Numeric, ConsumerCapacity),
        ("connect_num", Count, Other),
        ("recent_3month_shopping_count", Count, LocationTrajectory),
        ("online_shopping_count", Count, AppBehavior),
        ("express_count", Count, AppBehavior),
        ("finance_app_count", Count, AppBehavior),
        ("video_app_count", Count, AppBehavior),
        ("flight_count", Count, AppBehavior),
        ("train_count", Count, AppBehavior),
        ("tour_app_count", Count, AppBehavior),
        ("cost_sensitivity", Numeric, ConsumerCapacity),
        ("true_name_flag", Flag, Other),
        ("uni_student_flag", Flag, Other),
        ("blk_list_flag", Flag, Other),
        ("4g_unhealth_flag", Flag, Other),
        ("curr_overdue_flag", Flag, ConsumerCapacity),
        ("freq_shopping_flag", Flag, LocationTrajectory),
        ("wanda_flag", Flag, LocationTrajectory),
        ("sam_flag", Flag, LocationTrajectory),
        ("movie_flag", Flag, LocationTrajectory),
        ("tour_flag", Flag, LocationTrajectory),
        ("sport_flag", Flag, LocationTrajectory),
    ];
    Schema::new(
        cols.iter()
            .map(|&(n, k, s)| ColumnSpec::new(n, k, s))
            .collect(),
        "score",
    )
    .expect("canonical schema is well formed")
}

/// Column-major numeric matrix with a target vector and per-row ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<Vec<f64>>,
    target: Vec<f64>,
    ids: Vec<String>,
}

impl Dataset {
    pub fn new(schema: Schema, columns: Vec<Vec<f64>>, target: Vec<f64>, ids: Vec<String>) -> Result<Self> {
        if columns.len() != schema.len() {
            return Err(CreditError::Dimension(format!(
                "{} columns for a {}-column schema",
                columns.len(),
                schema.len()
            )));
        }
        let n = target.len();
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != n) {
            return Err(CreditError::Dimension(format!(
                "column `{}` has {} rows, target has {n}",
                schema.columns[j].name,
                c.len()
            )));
        }
        if ids.len() != n {
            return Err(CreditError::Dimension(format!("{} ids for {n} rows", ids.len())));
        }
        Ok(Dataset {
            schema,
            columns,
            target,
            ids,
        })
    }

    /// Like [`Dataset::new`] with ids `0..n`.
    pub fn from_columns(schema: Schema, columns: Vec<Vec<f64>>, target: Vec<f64>) -> Result<Self> {
        let ids = (0..target.len()).map(|i| i.to_string()).collect();
        Dataset::new(schema, columns, target, ids)
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.target.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.target.is_empty()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn column_by_name(&self, name: &str) -> Option<&[f64]> {
        self.schema.index_of(name).map(|j| self.columns[j].as_slice())
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.columns[col][row]
    }

    pub fn row(&self, row: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[row]).collect()
    }

    pub fn with_target(mut self, target: Vec<f64>) -> Result<Self> {
        if target.len() != self.n_rows() {
            return Err(CreditError::Dimension(format!(
                "replacement target has {} rows, dataset has {}",
                target.len(),
                self.n_rows()
            )));
        }
        self.target = target;
        Ok(self)
    }

    pub fn into_parts(self) -> (Schema, Vec<Vec<f64>>, Vec<f64>, Vec<String>) {
        (self.schema, self.columns, self.target, self.ids)
    }

    /// Rows in the given order (duplicates allowed).
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| rows.iter().map(|&r| c[r]).collect())
                .collect(),
            target: rows.iter().map(|&r| self.target[r]).collect(),
            ids: rows.iter().map(|&r| self.ids[r].clone()).collect(),
        }
    }

    pub fn select_columns(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.project(indices),
            columns: indices.iter().map(|&j| self.columns[j].clone()).collect(),
            target: self.target.clone(),
            ids: self.ids.clone(),
        }
    }

    pub fn subset(&self, subset: Subset) -> Dataset {
        self.select_columns(&self.schema.subset_indices(subset))
    }

    /// The named columns in the given order; fails naming any that are absent.
    pub fn select_named(&self, names: &[String]) -> Result<Dataset> {
        let idx: Vec<Option<usize>> = names.iter().map(|n| self.schema.index_of(n)).collect();
        let missing: Vec<String> = names.iter().zip(&idx).filter(|(_, i)| i.is_none()).map(|(n, _)| n.clone()).collect();
        if !missing.is_empty() {
            return Err(CreditError::ColumnMismatch {
                missing,
                unexpected: vec![],
            });
        }
        Ok(self.select_columns(&idx.into_iter().flatten().collect::<Vec<_>>()))
    }

    /// Fails unless the column names equal `expected`, in order.
    pub fn check_columns(&self, expected: &[String]) -> Result<()> {
        let have = self.schema.names();
        if have == expected {
            return Ok(());
        }
        let missing = expected.iter().filter(|n| !have.contains(n)).cloned().collect();
        let unexpected = have.iter().filter(|n| !expected.contains(n)).cloned().collect();
        Err(CreditError::ColumnMismatch {
            missing,
            unexpected,
        })
    }
}

/// One dataset per subset, each restricted to that subset's columns and
/// sharing the full target vector.
pub fn split_subsets(d: &Dataset) -> BTreeMap<Subset, Dataset> {
    Subset::ALL.into_iter().map(|b| (b, d.subset(b))).collect()
}

/// Row indices of a seeded train/test partition. Train gets
/// `⌈n·(1−f)⌉` rows (capped at `n−1`); both sides keep the original order.
pub fn split_indices(n: usize, test_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(CreditError::InvalidParameter(format!(
            "test fraction must lie in (0, 1), got {test_fraction}"
        )));
    }
    if n < 2 {
        return Err(CreditError::InvalidParameter("need at least 2 rows to split".into()));
    }
    let n_train = ((n as f64 * (1.0 - test_fraction) - 1e-9).ceil() as usize).clamp(1, n - 1);
    let mut r = rng::stream(seed, rng::SPLIT, 0);
    let mut train = rng::sample_sorted(&mut r, n, n_train);
    let mut is_train = vec![false; n];
    for &i in &train {
        is_train[i] = true;
    }
    let test = (0..n).filter(|&i| !is_train[i]).collect();
    train.sort_unstable();
    Ok((train, test))
}

pub fn train_test_split(d: &Dataset, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train, test) = split_indices(d.n_rows(), test_fraction, seed)?;
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(n: usize) -> Dataset {
        let schema = Schema::numeric(&["a", "b"], Subset::Other, "y").unwrap();
        let a = (0..n).map(|i| i as f64).collect();
        let b = (0..n).map(|i| (i * i) as f64).collect();
        let y = (0..n).map(|i| 2.0 * i as f64).collect();
        Dataset::from_columns(schema, vec![a, b], y).unwrap()
    }

    #[test]
    fn canonical_schema_has_28_predictors() {
        let s = canonical_schema();
        assert_eq!(s.len(), 28);
        assert_eq!(s.target_name(), "score");
        assert!(s.index_of("id").is_none());
        assert!(s.index_of("score").is_none());
    }

    #[test]
    fn canonical_kinds_and_subsets() {
        let s = canonical_schema();
        let top_up = s.column("top_up_amount").unwrap();
        assert_eq!(top_up.kind, ColumnKind::Numeric);
        assert_eq!(top_up.subset, Subset::ConsumerCapacity);
        let wanda = s.column("wanda_flag").unwrap();
        assert_eq!(wanda.kind, ColumnKind::Flag);
        assert_eq!(wanda.subset, Subset::LocationTrajectory);
        assert_eq!(s.column("finance_app_count").unwrap().subset, Subset::AppBehavior);
        assert_eq!(s.column("blk_list_flag").unwrap().subset, Subset::Other);
        for b in Subset::ALL {
            assert_eq!(s.subset_indices(b).len(), 7, "{b}");
        }
    }

    #[test]
    fn schema_rejects_duplicates_and_target_overlap() {
        assert!(Schema::numeric(&["a", "a"], Subset::Other, "y").is_err());
        assert!(Schema::numeric(&["a", "y"], Subset::Other, "y").is_err());
        assert!(Schema::numeric(&["id"], Subset::Other, "y").is_err());
    }

    #[test]
    fn subsets_partition_columns_and_share_target() {
        let schema = canonical_schema();
        let n = 5;
        let cols = (0..28).map(|j| vec![j as f64; n]).collect();
        let d = Dataset::from_columns(schema, cols, vec![1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        let parts = split_subsets(&d);
        assert_eq!(parts.len(), 4);
        let total: usize = parts.values().map(|p| p.n_cols()).sum();
        assert_eq!(total, 28);
        let mut names: Vec<String> = parts.values().flat_map(|p| p.schema().names()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 28);
        for p in parts.values() {
            assert_eq!(p.target(), d.target());
        }
        let app = &parts[&Subset::AppBehavior];
        assert!(app.schema().index_of("finance_app_count").is_some());
        for (b, p) in &parts {
            if *b != Subset::AppBehavior {
                assert!(p.schema().index_of("finance_app_count").is_none());
            }
        }
    }

    #[test]
    fn split_sizes_and_determinism() {
        let d = toy(10);
        let (tr, te) = train_test_split(&d, 0.2, 7).unwrap();
        assert_eq!((tr.n_rows(), te.n_rows()), (8, 2));
        let (tr2, te2) = train_test_split(&d, 0.2, 7).unwrap();
        assert_eq!(tr, tr2);
        assert_eq!(te, te2);
        let mut all: Vec<String> = tr.ids().iter().chain(te.ids()).cloned().collect();
        all.sort_by_key(|s| s.parse::<usize>().unwrap());
        assert_eq!(all, d.ids());
    }

    #[test]
    fn split_differs_across_seeds() {
        let (a, _) = split_indices(100, 0.2, 1).unwrap();
        let (b, _) = split_indices(100, 0.2, 2).unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        let d = toy(10);
        assert!(train_test_split(&d, 0.0, 1).is_err());
        assert!(train_test_split(&d, 1.0, 1).is_err());
        assert!(train_test_split(&toy(1), 0.5, 1).is_err());
    }

    #[test]
    fn check_columns_names_the_difference() {
        let d = toy(3);
        let err = d.check_columns(&["a".into(), "c".into()]).unwrap_err();
        match err {
            CreditError::ColumnMismatch { missing, unexpected } => {
                assert_eq!(missing, vec!["c".to_string()]);
                assert_eq!(unexpected, vec!["b".to_string()]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
