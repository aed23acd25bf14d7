//! Crate-wide error type.

use std::path::PathBuf;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("time {t} outside [0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("position {0} outside [0, 1]")]
    PositionOutOfRange(f64),

    #[error("penalty parameter must be {requirement}, got {alpha}")]
    InvalidAlpha { alpha: f64, requirement: &'static str },

    #[error("mode index {index} outside 1..={max}")]
    ModeOutOfRange { index: usize, max: usize },

    #[error("{points} grid samples cannot resolve {modes} modes (need at least {needed})")]
    InsufficientResolution {
        points: usize,
        modes: usize,
        needed: usize,
    },

    #[error("theta {0} outside [0, 1]")]
    ThetaOutOfRange(f64),

    #[error("invalid alpha grid: {0}")]
    InvalidAlphaGrid(String),

    #[error("slope fit needs at least 2 positive-error records in window, found {0}")]
    DegenerateFit(usize),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("solver failed at alpha = {alpha}: {source}")]
    SweepPoint {
        alpha: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error in \"{input}\": {message}")]
    Parse { input: String, message: String },

    #[error("config key \"{key}\": {message}")]
    Config { key: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(input: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            message: message.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }
}
