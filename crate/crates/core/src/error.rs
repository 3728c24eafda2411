use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value in input field: {0}")]
    NonFinite(String),

    #[error("ambiguous contour: all samples equal the requested level")]
    AmbiguousContour,

    #[error("distance undefined: {0}")]
    EmptyContour(String),

    #[error("set has vanished: field has no sign change")]
    VanishedSet,

    #[error("solver did not converge after {} iterations (gap {:.3e})", partial.iterations, partial.gap)]
    NotConverged { partial: Box<crate::tv::ProxResult> },

    #[error("infeasible primal point: u < v by {0:.3e}")]
    Infeasible(f64),

    #[error("step {step} failed: {source}")]
    StepFailed {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("evaluation band touches the grid boundary")]
    BandTouchesBoundary,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
