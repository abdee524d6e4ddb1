//! Error type shared across the crate.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A trace CSV row failed to parse. `line` is 1-based and counts the
    /// header line.
    #[error("trace parse error at line {line}: {message}")]
    TraceParse { line: usize, message: String },

    /// An input was too short for the requested horizon or window.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A genie window or slot index reached past the end of the trace.
    #[error("slot range error: {0}")]
    SlotRange(String),

    /// The channel trace ended in the middle of a committed batch.
    #[error("trace exhausted at slot {slot} during a batch")]
    TraceExhausted { slot: usize },

    /// Decoding was attempted before full rank was collected.
    #[error("decoder not ready: {missing_dof} degrees of freedom missing")]
    NotReady { missing_dof: usize },

    /// Experiment configuration failed to parse or validate.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
