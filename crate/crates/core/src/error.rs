use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters, missing kernel metadata, malformed config files.
    #[error("configuration error: {0}")]
    Config(String),

    /// Times handed to the engine were not strictly increasing.
    #[error("ordering error: t = {t} is not after previous time {prev}")]
    Ordering { t: f64, prev: f64 },

    /// A distance `t_n - t_j` is not covered by any approximation interval,
    /// usually a step below `h_min`.
    #[error(
        "step-scale error: distance {distance} is outside every level interval (h_min = {h_min})"
    )]
    StepScale { distance: f64, h_min: f64 },

    /// The mosaic needs a level whose ODE bank was not started at `t = 0`.
    #[error(
        "horizon exceeded: t = {t} needs level {level} but only {available} levels were allocated"
    )]
    Horizon {
        t: f64,
        level: usize,
        available: usize,
    },

    /// Internal consistency check of the mosaic bookkeeping failed.
    #[error("bookkeeping error: {0}")]
    Bookkeeping(String),

    /// A step-size controller gave up (step below guard, non-positive density).
    #[error("controller failure at t = {t}: {reason}")]
    Controller { t: f64, reason: String },

    /// Nonlinear or linear solve inside an application failed.
    #[error("solver failure at t = {t}: {reason}")]
    Solver { t: f64, reason: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the command line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Io(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}
