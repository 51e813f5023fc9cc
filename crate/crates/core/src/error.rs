use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read or write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("column `{0}` not found")]
    MissingColumn(String),

    #[error("duplicate column name `{0}`")]
    DuplicateColumn(String),

    #[error("target column must hold exactly two distinct values, found {found}: {values:?}")]
    TargetNotBinary { found: usize, values: Vec<String> },

    #[error("row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("row {row}, column `{column}`: cannot parse `{value}` as a number")]
    ParseNumber {
        row: usize,
        column: String,
        value: String,
    },

    #[error("{count} row(s) contain empty cells; missing values are not supported")]
    MissingValues { count: usize },

    #[error("column `{column}`: unseen category `{value}`")]
    UnseenCategory { column: String, value: String },

    #[error("row does not conform to the schema: {0}")]
    SchemaMismatch(String),

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("surrogate system is singular (ridge_lambda = 0 and the design is rank-deficient)")]
    SingularSystem,

    #[error("the model was deemed fair; there is no dropout pool to build")]
    GatePassed,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("repetition {repetition} (seed {seed}): {source}")]
    Repetition {
        repetition: usize,
        seed: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
