use std::path::PathBuf;

use lrcm_core::data::DataError;
use lrcm_core::ensemble::EnsembleError;
use lrcm_core::hmatrix::HMatrixError;
use lrcm_core::kernels::KernelError;
use lrcm_core::solver::SolveError;

use crate::stats::StatsError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("missing column `{0}`")]
    MissingColumn(String),
    #[error("row {row}, column `{column}`: cannot parse {value:?} as a number")]
    Parse { row: usize, column: String, value: String },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    HMatrix(#[from] HMatrixError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by invalid user input rather than by a run.
    pub fn is_usage(&self) -> bool {
        matches!(self, Self::Config(_))
    }
}
