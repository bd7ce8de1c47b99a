use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CreditError {
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("column mismatch: missing [{}], unexpected [{}]", missing.join(", "), unexpected.join(", "))]
    ColumnMismatch {
        missing: Vec<String>,
        unexpected: Vec<String>,
    },

    #[error("cannot parse {value:?} in column `{column}` at data row {row}")]
    Parse {
        row: usize,
        column: String,
        value: String,
    },

    #[error("missing target value at data row {row}")]
    MissingTarget { row: usize },

    #[error("column `{0}` has no finite values; median imputation is impossible")]
    ImputationImpossible(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("histogram consistency violated: {0}")]
    HistogramInconsistent(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("linear system is singular; increase the ridge penalty")]
    SingularSystem,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("model format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, CreditError>;

impl CreditError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CreditError::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        CreditError::Csv {
            path: path.into(),
            source,
        }
    }
}
