use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("no convergence after {iterations} iterations: {reason}")]
    Convergence { iterations: usize, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("non-finite state at t = {time}")]
    Blowup { time: f64 },

    #[error("state left the admissible ball at t = {time} (norm {norm:e} > {radius:e})")]
    BallExit { time: f64, norm: f64, radius: f64 },

    #[error("adaptive step fell below {min_dt:e} at t = {time}")]
    StepUnderflow { time: f64, min_dt: f64 },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
