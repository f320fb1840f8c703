use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed input file. `line` is 1-based.
    #[error("{what}, line {line}: {msg}")]
    Parse {
        what: &'static str,
        line: usize,
        msg: String,
    },

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("missing {what}: {key}")]
    Missing { what: &'static str, key: String },

    #[error("scale {0} has an incomplete vector grid")]
    PartialGrid(String),

    #[error("layer mismatch: intensity vector built at {dvec:?}, ranking requested at {requested:?}")]
    LayerMismatch {
        dvec: Option<i64>,
        requested: Option<i64>,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(what: &'static str, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            what,
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            msg: msg.into(),
        }
    }

    pub fn missing(what: &'static str, key: impl Into<String>) -> Self {
        Error::Missing {
            what,
            key: key.into(),
        }
    }
}
