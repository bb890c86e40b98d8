//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid initial data: {0}")]
    InvalidData(String),

    #[error("axis {axis}: carrier frequency {carrier} is unresolved at grid spacing {spacing} (|carrier| * h > pi)")]
    UnresolvedCarrier {
        axis: usize,
        carrier: f64,
        spacing: f64,
    },

    #[error("field values must all be finite")]
    NonFiniteField,

    #[error("value count {got} does not match the grid ({expected} nodes)")]
    SizeMismatch { expected: usize, got: usize },

    #[error("zero field: Plancherel ratio is undefined")]
    ZeroField,

    #[error("singular frequency: the multiplier is undefined on the plane lambda = 0")]
    SingularFrequency,

    #[error("initial data must carry time 0, got t = {0}")]
    NotInitialTime(f64),

    #[error("lambda = 0 plane carries energy fraction {fraction:.3e}, above the threshold {threshold:.3e}")]
    IllPrepared { fraction: f64, threshold: f64 },

    #[error("trajectory times must be strictly increasing")]
    NonIncreasingTimes,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("non-uniform time spacing around index {0}")]
    NonUniformSpacing(usize),

    #[error("frequency lies outside the sampled band on axis {0}")]
    OutOfBand(usize),

    #[error("unsupported sphere dimension m = {0} (supported: 1 and 2)")]
    UnsupportedSphereDim(usize),

    #[error("unsupported transverse dimensions d = {d}, n = {n} for this operation")]
    UnsupportedDims { d: usize, n: usize },

    #[error("invalid multiplier policy: {0}")]
    InvalidPolicy(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("snapshot format: {0}")]
    SnapshotFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
