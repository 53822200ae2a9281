use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid volume [{lo}, {hi}]: {reason}")]
    InvalidVolume { lo: i64, hi: i64, reason: &'static str },

    #[error("spin value {0} is not -1 or +1")]
    InvalidSpin(i64),

    #[error("configuration has {got} spins but the volume holds {expected} sites")]
    LengthMismatch { expected: usize, got: usize },

    #[error("boundary cutoff must be at least 1")]
    ZeroCutoff,

    #[error("frozen boundary pattern does not cover exterior site {site}")]
    FrozenPatternGap { site: i64 },

    #[error("site {site} lies outside the volume [{lo}, {hi}]")]
    SiteOutsideVolume { site: i64, lo: i64, hi: i64 },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("{free} free sites exceed the exact-enumeration cap of {cap}")]
    CapExceeded { free: usize, cap: usize },

    #[error("constraint at site {site} contradicts the frozen boundary pattern")]
    ConstraintConflict { site: i64 },

    #[error("volumes are not nested in ascending order at position {index}")]
    NotNested { index: usize },

    #[error("site {0} is frozen by the constraint")]
    SiteFrozen(i64),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("operation requires a Dobrushin boundary condition")]
    NotDobrushin,

    #[error("no configurations carry the interface at theta = {theta}")]
    EmptyConditioningClass { theta: f64 },

    #[error("flip points are not strictly ordered at index {index}")]
    UnorderedFlips { index: usize },

    #[error("{what}: tail allowance {allowance:e} exceeds tolerance {tolerance:e}")]
    InsufficientCutoff {
        what: &'static str,
        allowance: f64,
        tolerance: f64,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn params(msg: impl Into<String>) -> Self {
        Error::InvalidParams(msg.into())
    }

    /// True for errors caused by caller-supplied values rather than by the
    /// environment or by resource limits.
    pub fn is_precondition(&self) -> bool {
        !matches!(
            self,
            Error::CapExceeded { .. } | Error::Io { .. } | Error::Csv { .. } | Error::Json(_)
        )
    }
}
