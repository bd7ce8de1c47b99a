//! Credit scoring toolkit: histogram gradient boosting, classical base
//! learners, model fusion and regression metrics over a fixed operator
//! feature schema.

pub mod baselearners;
pub mod binning;
pub mod data;
pub mod error;
pub mod fusion;
pub mod gbdt;
pub mod metrics;
pub mod persist;
mod rng;

pub use binning::{apply_bins, fit_bins, BinMapper, BinnedDataset};
pub use data::{canonical_schema, ColumnKind, ColumnSpec, Dataset, Schema, Subset};
pub use error::{CreditError, Result};
pub use gbdt::{BoostedModel, BoosterParams};
pub use baselearners::{FittedLearner, LearnerKind, LearnerParams, LearnerSpec};
pub use fusion::{FusionConfig, FusionModel, Strategy};
pub use metrics::{evaluate, MetricsReport};
