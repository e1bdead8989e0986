use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} outside the supported range 1..={max}", max = crate::domain::MAX_DIM)]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("coordinate {0} is not in {{-1, 0, +1}}")]
    InvalidCoordinate(i64),

    #[error("point must have every coordinate in {{-1, +1}}")]
    NotFullSupport,

    #[error("exact evaluation enumerates the cube and needs d <= {max}, got {dim}", max = crate::domain::MAX_EXACT_DIM)]
    ExactTooLarge { dim: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("schedule covers {scheduled} parties but {parties} were supplied")]
    ScheduleMismatch { scheduled: usize, parties: usize },

    #[error("learner needs at least one sample")]
    EmptySample,
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
