use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("symbol requested at the zero wave vector")]
    ZeroWaveVector,

    #[error("hyperbolicity lost: f*rho = {product} < 0")]
    HyperbolicityLoss { product: f64 },

    #[error("density not positive: min rho = {min} at node {node}")]
    NonPositiveDensity { min: f64, node: usize },

    #[error("pressure law `{0}` does not depend on density alone")]
    NotReducible(String),

    #[error("velocity is not divergence-free (|div v| = {0:e})")]
    NotSolenoidal(f64),

    #[error("state has no artificial pressure component")]
    MissingPressure,

    #[error("operation requires scheme {expected}, got {found}")]
    WrongScheme { expected: &'static str, found: String },

    #[error("report carries no {0} data")]
    MissingData(&'static str),

    #[error("incompatible runs: {0}")]
    Incompatible(String),

    #[error("twin run failed at t = {time}: {kind}")]
    TwinFailure { kind: String, time: f64 },

    /// `line` is 0 for command-line overrides and missing keys.
    #[error("config{}: key `{key}`: {message}", at_line(*line))]
    Config {
        line: usize,
        key: String,
        message: String,
    },

    #[error("field dump format error: {0}")]
    Format(String),

    #[error("unsupported field dump version {0}")]
    UnsupportedVersion(u32),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn at_line(line: usize) -> String {
    if line == 0 {
        String::new()
    } else {
        format!(" line {line}")
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
