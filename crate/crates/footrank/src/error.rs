use thiserror::Error;

/// Errors produced by the rating engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("row {row}: {message}")]
    Parse { row: usize, message: String },

    #[error("unknown team: {0}")]
    UnknownTeam(String),

    #[error("empty selection: {0}")]
    EmptySelection(String),

    #[error("intensity overflow: |z + b*eta| = {0:.3} exceeds 30 natural-log units")]
    IntensityOverflow(f64),

    #[error("ALO singularity at game {game}: denominator {denominator:.6e} is not positive")]
    AloSingularity { game: usize, denominator: f64 },

    #[error("unregularized degenerate problem: {0}")]
    Degenerate(String),

    #[error("no convergence after {iterations} iterations (gradient max-norm {grad_norm:.3e}, objective {objective:.6e})")]
    NoConvergence {
        iterations: usize,
        grad_norm: f64,
        objective: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("zero outcome frequency: {0}")]
    ZeroFrequency(&'static str),

    #[error("objective is non-finite at every grid point of parameter {0}")]
    NonFiniteObjective(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
