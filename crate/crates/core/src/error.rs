use thiserror::Error;

/// Errors produced anywhere in the decoding and estimation pipeline.
#[derive(Debug, Error)]
pub enum GkpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("vector is not in the dual lattice (max deviation {deviation:.3e})")]
    NotInDualLattice { deviation: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("no crossing between d={d} and d={d2} in the sampled range")]
    NoCrossing { d: usize, d2: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, GkpError>;
