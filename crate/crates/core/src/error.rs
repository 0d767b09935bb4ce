use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RankError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("zero surviving rows after dropping rows with missing or non-numeric cells")]
    NoRows,

    #[error("duplicate attribute name `{0}`")]
    DuplicateAttribute(String),

    #[error("id column `{0}` not found in header")]
    MissingIdColumn(String),

    #[error("no attribute columns")]
    NoAttributes,

    #[error("constant column `{0}`: zero range cannot be normalized")]
    ConstantColumn(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid orientation entry `{0}`; expected +1/-1 or +/-")]
    InvalidOrientation(String),

    #[error("curve parameter {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("preconditioner column {0} has zero norm")]
    SingularPreconditioner(usize),

    #[error("degenerate step size: lambda_min + lambda_max = {0} <= 0")]
    DegenerateStepSize(f64),

    #[error("all projection scores coincide; the fit is degenerate, try a different seed")]
    DegenerateScores,

    #[error("covariance is zero: all rows are identical")]
    ZeroCovariance,

    #[error("need at least {needed} rows, got {actual}")]
    TooFewRows { needed: usize, actual: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, RankError>;
