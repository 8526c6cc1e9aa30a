use alloc::string::String;

use crate::statistics::DegenerateSample;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite observation at index {index}")]
    NonFinite { index: usize },

    /// A ratio statistic is undefined for this sample (see [`DegenerateSample`]).
    #[error("degenerate sample: {0}")]
    Degenerate(DegenerateSample),

    #[error("numerical failure: {message} (achieved {achieved:e})")]
    Numerical { message: String, achieved: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// `true` for the "no decision" outcome rather than a genuine failure.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::Degenerate(_))
    }
}
