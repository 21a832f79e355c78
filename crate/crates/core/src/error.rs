use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid Orlicz function: {0}")]
    InvalidPhi(String),

    #[error("cannot parse Φ spec `{spec}`: {reason}")]
    PhiSpec { spec: String, reason: String },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid level {level}: filtration has {levels} levels")]
    InvalidLevel { level: usize, levels: usize },

    #[error("invalid filtration: {0}")]
    InvalidFiltration(String),

    #[error("not a martingale: E_{level}(x_{next}) differs from x_{level} by {residual:.3e} (Frobenius)", next = .level + 1)]
    NotAMartingale { level: usize, residual: f64 },

    #[error("integral condition fails: {0}")]
    Divergent(String),

    #[error("regime error: {0}")]
    Regime(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
