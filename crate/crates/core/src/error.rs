use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid prior spec: {0}")]
    InvalidSpec(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite even after jitter {jitter:e} (failing pivot {pivot})")]
    NotPositiveDefinite { pivot: usize, jitter: f64 },

    #[error("degenerate leading stage variance {0:e}")]
    DegenerateStageVariance(f64),

    #[error("budget infeasible: cheapest allocation costs {cheapest}")]
    BudgetInfeasible { cheapest: f64 },

    #[error("budget below one final-stage trial")]
    BudgetBelowOneTrial,

    #[error("requires ≥3 stages, got {0}")]
    TooFewStages(usize),

    #[error("heatmap defined for 3 stages, got {0}")]
    HeatmapStages(usize),

    #[error("dense oracle size guard exceeded: n·m = {0} > 2000")]
    OracleTooLarge(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
