use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate steering geometry")]
    DegenerateSteering,

    #[error("position out of bounds: ({x}, {y}, {z})")]
    OutOfBounds { x: f64, y: f64, z: f64 },

    #[error("nonpositive noise variance: {0}")]
    NonPositiveNoise(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A configuration value or scenario field broke an invariant. `path` is
    /// the dotted config key, e.g. `noise.bandwidth_b`.
    #[error("{path}: {message}")]
    Validation { path: String, message: String },

    #[error("beam power {power_w} W exceeds eye-safety cap {cap_w} W")]
    EyeSafety { power_w: f64, cap_w: f64 },

    #[error("config parse error at `{path}`: {message}")]
    Parse { path: String, message: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for the CLI: 2 for I/O failures, 1 for everything
    /// else (validation, parse and model errors).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } => 2,
            _ => 1,
        }
    }
}
