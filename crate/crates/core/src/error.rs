use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {message}", path.display())]
    Format { path: PathBuf, message: String },

    /// Cholesky factorisation kept failing after the jitter reached its ceiling.
    #[error("cholesky factorisation of the {matrix} failed (jitter reached {jitter:e})")]
    Conditioning { matrix: &'static str, jitter: f64 },

    /// Every posterior curve scored zero, so there is no gradient evidence to follow.
    #[error(
        "lost edge at iteration {iteration}: all {curves} posterior curves scored 0; \
         try a larger signal variance or better endpoint estimates"
    )]
    LostEdge { iteration: usize, curves: usize },

    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    Shape {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
