use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mass matrix is numerically singular (check link masses and inertias)")]
    SingularMass,

    #[error("contact constraint is singular: J M^-1 J^T is not invertible")]
    SingularConstraint,

    #[error("numerical blow-up at t = {time:.6} s: {detail}")]
    NumericalBlowup { time: f64, detail: String },

    #[error("profile parameter s = {0} is outside [0, 1]")]
    Domain(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("schema mismatch: {left} vs {right}")]
    SchemaMismatch { left: String, right: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad inputs rather than by the numerics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_)
                | Error::Io { .. }
                | Error::Parse { .. }
                | Error::SchemaMismatch { .. }
                | Error::Domain(_)
        )
    }
}
