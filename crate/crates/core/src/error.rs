use thiserror::Error;

/// Errors raised by the ranking library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected} items, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("oracle scale exceeded: n = {n} is above the exhaustive-search cap of {cap}")]
    OracleScaleExceeded { n: usize, cap: usize },

    #[error("not strictly stochastically transitive: {0}")]
    NotTransitive(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("cell budget exceeded: overlay needs more than {cap} cells")]
    BudgetExceeded { cap: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Json(_) | Error::Csv(_) | Error::Io(_) => 2,
            Error::OracleScaleExceeded { .. } | Error::BudgetExceeded { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
