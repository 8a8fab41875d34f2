use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed header or text record. `line` is 1-based.
    #[error("format error at line {line}: {message} (`{content}`)")]
    Format {
        line: usize,
        content: String,
        message: String,
    },

    #[error("size mismatch: expected {expected} bytes of payload, found {found}")]
    SizeMismatch { expected: usize, found: usize },

    #[error("shape mismatch: {left} vs {right}")]
    Shape { left: String, right: String },

    #[error("index out of bounds: {0}")]
    Bounds(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("unknown vocabulary token `{0}`")]
    Vocabulary(String),

    #[error("degenerate radial bins (fewer than 2 samples): {0:?}")]
    DegenerateBins(Vec<usize>),

    #[error("size error: {0}")]
    Size(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn shape(left: impl ToString, right: impl ToString) -> Self {
        Error::Shape {
            left: left.to_string(),
            right: right.to_string(),
        }
    }

    pub(crate) fn format(line: usize, content: &str, message: impl Into<String>) -> Self {
        Error::Format {
            line,
            content: content.to_string(),
            message: message.into(),
        }
    }
}
