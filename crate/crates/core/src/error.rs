use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure: {what} (achieved tolerance {achieved:e})")]
    Numerical { what: String, achieved: f64 },

    /// The spectrum used for a bandwidth measurement is too coarse.
    #[error("under-resolved spectrum: {bins:.1} bins across the 3-dB width, need at least {required}")]
    Resolution { bins: f64, required: usize },

    /// No band count in the search range reaches the requested coverage.
    #[error(
        "target coverage {target} unreachable: achievable range is ({floor}, {ceiling}] for 2..={max_bands} bands"
    )]
    Unreachable {
        target: f64,
        floor: f64,
        ceiling: f64,
        max_bands: usize,
    },

    #[error("{path}: line {line}: {msg}")]
    Parse { path: PathBuf, line: u64, msg: String },

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors caused by bad input rather than numerics.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::InvalidInput(_) | Error::Unreachable { .. } | Error::Parse { .. } | Error::Wav(_)
        )
    }
}
