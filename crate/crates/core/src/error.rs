use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("could not place {n_cars} cars on a {road_length} m road without overlap")]
    Placement { n_cars: usize, road_length: f64 },

    #[error("non-finite value in {0}")]
    Numeric(&'static str),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("config hash mismatch: expected {expected}, found {found}")]
    ConfigMismatch { expected: String, found: String },

    #[error("checkpoint does not match environment: {0}")]
    CheckpointMismatch(String),

    #[error("replay diverged at substep {substep}")]
    Divergence { substep: u64 },

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error("checkpoint encoding: {0}")]
    Codec(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
