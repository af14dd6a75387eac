use thiserror::Error;

/// Errors produced by the channel constructions and the simulators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("eigen-solver did not converge (residual {residual:.3e})")]
    NonConvergence { residual: f64 },

    #[error("exceptional point: eigenvector condition {condition:.3e}, threshold {threshold:.1e} ({context})")]
    ExceptionalPoint {
        condition: f64,
        threshold: f64,
        context: String,
    },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate outcome: post-selection probability {probability:.3e}")]
    DegenerateOutcome { probability: f64 },

    #[error("config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
