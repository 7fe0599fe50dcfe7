use thiserror::Error;

use crate::geometry::Direction;

/// Errors raised by the transform, code and baseline layers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("direction ({p},{q}) is not a co-prime pair with q > 0")]
    NotCoprime { p: i32, q: i32 },

    #[error("direction {0} appears more than once")]
    DuplicateDirection(Direction),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("symbol width {0} is not a power of two in 1..=64")]
    InvalidSymbolWidth(usize),

    #[error("projection {index} has {actual} bytes of bins, expected {expected}")]
    ProjectionSize {
        index: usize,
        expected: usize,
        actual: usize,
    },

    #[error("no reconstructible bin left with {remaining} pixels unknown")]
    InsufficientProjections { remaining: usize },

    #[error("re-encoding along {0} does not match the supplied projection")]
    InconsistentProjections(Direction),

    #[error("projections do not match the reconstruction schedule: {0}")]
    ScheduleMismatch(String),

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("block needs {cols} columns, more than the 2^32-1 limit")]
    BlockTooLarge { cols: u64 },

    #[error("input is empty")]
    EmptyInput,

    #[error("got {got} projections, need at least {need}")]
    NotEnoughProjections { got: usize, need: usize },

    #[error("direction {0} is not part of the code's direction set")]
    UnknownDirection(Direction),

    #[error("{subsets} subsets exceed the enumeration cap of {cap}")]
    TooManySubsets { subsets: u128, cap: u128 },

    #[error("packet length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("singular matrix")]
    SingularMatrix,

    #[error("timer granularity {granularity_ns} ns exceeds 1% of the {median_ns} ns median")]
    TimerResolutionTooCoarse { granularity_ns: u64, median_ns: u64 },

    #[error("invalid benchmark scenario: {0}")]
    InvalidScenario(String),

    #[error("nothing to report")]
    EmptyReport,

    #[error("report i/o: {0}")]
    Report(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
