use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("ambiguous normal")]
    AmbiguousNormal,
    #[error("stamp out of pad")]
    StampOutOfPad,
    #[error("degenerate dimension {0}")]
    DegenerateDimension(usize),
    #[error("unstandardized target")]
    UnstandardizedTarget,
    #[error("signal space mismatch: expected {expected:?}")]
    SignalSpaceMismatch { expected: crate::tactile::SignalSpace },
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("stale cache: cache does not match network shape")]
    StaleCache,
    #[error("empty split")]
    EmptySplit,
    #[error("empty class {0} in test split")]
    EmptyClass(usize),
    #[error("k = {k} exceeds number of points {n}")]
    TooManyClusters { k: usize, n: usize },
    #[error("empty input")]
    Empty,
}

pub type Result<T> = core::result::Result<T, Error>;
