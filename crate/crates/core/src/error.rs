use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("schema error: {0}")]
    Schema(String),
    #[error("invalid value: {0}")]
    Value(String),
    #[error("unsupported audio format: {0}")]
    Format(String),
    #[error("unsupported format version {found:?} (expected {expected:?})")]
    Version { found: String, expected: String },
    #[error("index {index} out of range (len {len})")]
    Index { index: usize, len: usize },
    #[error("unknown semantic tag {0:?}")]
    UnknownTag(String),
    #[error("skeleton mismatch: {0}")]
    SkeletonMismatch(String),
    #[error("motion graph is empty")]
    EmptyGraph,
    #[error("phrase {0} has no candidate nodes")]
    EmptyCandidate(usize),
    #[error("search space of {0} assignments exceeds the brute-force limit")]
    TooLarge(u128),
    #[error("length mismatch: {0}")]
    LengthMismatch(String),
    #[error("invalid span [{start}, {end}) for sequence of {len} frames")]
    Span { start: usize, end: usize, len: usize },
    #[error("path does not match graph: {0}")]
    PathGraphMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Input/configuration problems, as opposed to failures of a pipeline stage.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::EmptyGraph
                | Error::EmptyCandidate(_)
                | Error::TooLarge(_)
                | Error::SkeletonMismatch(_)
                | Error::PathGraphMismatch(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
