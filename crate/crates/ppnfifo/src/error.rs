use std::path::PathBuf;

use ppnfifo_core::Error;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{what}: {source}")]
    Model { what: String, source: Error },
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("invariant `{invariant}` violated on {subject}: {witness}")]
    Invariant { invariant: &'static str, subject: String, witness: String },
    #[error("reports do not match: {0}")]
    MismatchedReports(String),
    #[error("oracle disagrees with the symbolic analysis: {0}")]
    OracleDisagreement(String),
}

pub type AppResult<T> = Result<T, AppError>;

impl AppError {
    /// Process exit status: 2 for bad input, 3 for exhausted budgets, 1
    /// otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Model { source, .. } | AppError::Core(source) => match source {
                Error::BudgetExceeded(_) | Error::UnboundedSearch(_) | Error::ComplexityCap(_) => 3,
                Error::Overflow(_) => 1,
                _ => 2,
            },
            AppError::Json { .. } | AppError::Invariant { .. } | AppError::MismatchedReports(_) => 2,
            AppError::Io { .. } | AppError::OracleDisagreement(_) => 1,
        }
    }
}
