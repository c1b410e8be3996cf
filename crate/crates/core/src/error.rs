use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "bessel order {order} or argument {x} outside the supported range (|n| <= 60, |x| <= 100)"
    )]
    BesselRange { order: i32, x: f64 },

    #[error("integrator step size underflow at tau={tau:.6} ({context})")]
    StepUnderflow { tau: f64, context: String },

    #[error("integrator exceeded {steps} steps at tau={tau:.6} ({context})")]
    TooManySteps {
        steps: usize,
        tau: f64,
        context: String,
    },

    #[error("{0}")]
    Undefined(String),

    #[error("hierarchy not converged: {0}")]
    NotConverged(String),

    #[error("config error in {path}: line {line}: {msg}")]
    Config {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("sweep interrupted after {0} new points")]
    Interrupted(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
