//! Error types shared across the crate.

use thiserror::Error;

/// Errors raised by panel construction, estimation, and the pipelines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A panel with zero periods.
    #[error("empty panel: at least one period is required")]
    EmptyPanel,

    /// Shapes of inputs do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A NaN or infinity in numeric input.
    #[error("non-finite entry: {0}")]
    NonFiniteEntry(String),

    /// Period labels out of order.
    #[error("period labels must be strictly increasing: {0}")]
    NonMonotonicLabels(String),

    /// Pooled Gram is identically zero and no ridge fallback was allowed.
    #[error("degenerate design: every regressor block is zero and ridge fallback is disabled")]
    DegenerateDesign,

    /// A period index outside `0..periods`.
    #[error("period index {index} out of range for {periods} periods")]
    IndexOutOfRange { index: usize, periods: usize },

    /// No grid point on a regularization path matches the requested active-set size.
    #[error("no lambda on the path has an active set of size {0}")]
    NoMatchingLambda(usize),

    /// Too few observations to form a single VEC regression row.
    #[error("series too short: {len} observations cannot support lag order {lag_order}")]
    SeriesTooShort { len: usize, lag_order: usize },

    /// Requested cointegration rank exceeds the series dimension.
    #[error("cointegration rank {rank} exceeds series dimension {dim}")]
    RankTooLarge { rank: usize, dim: usize },

    /// The Gram matrix of the cointegration basis cannot be inverted.
    #[error("beta* Gram matrix is singular: basis does not have full column rank")]
    SingularBetaGram,

    /// A synthetic jump schedule that violates its preconditions.
    #[error("invalid jump schedule: {0}")]
    InvalidSchedule(String),

    /// A simulated system whose companion dynamics are explosive.
    #[error("unstable system: {0}")]
    UnstableSystem(String),

    /// Inconsistent solver or pipeline configuration.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
