use thiserror::Error;

/// Errors raised by the analysis toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// r = 0: the variance never reaches the QNL from below, so there are no crossings.
    #[error("no QNL crossings: the state is not squeezed (r = 0)")]
    NoCrossings,

    #[error("insufficient scan range: found {found} QNL crossings, need at least 3")]
    InsufficientScan { found: usize },

    #[error("no valid crossing triple in the trace")]
    NoValidTriple,

    /// The MU variance equals the QNL, which carries no efficiency information.
    #[error("efficiency is undefined where the minimum-uncertainty variance equals the QNL")]
    UndefinedEfficiency,

    #[error("trace too short: {len} samples, need at least {min}")]
    TraceTooShort { len: usize, min: usize },

    #[error("trace format error at line {line}: {msg}")]
    Format { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
