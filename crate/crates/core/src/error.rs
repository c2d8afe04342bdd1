use crate::rational::Rational;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid direction: {0}")]
    InvalidDirection(String),

    #[error("invalid strip width: {0}")]
    InvalidWidth(String),

    #[error("no lattice point of the strip lies above m = {m}")]
    InfeasiblePoint { m: i64 },

    #[error("strip width {width} too small for decomposition; it must exceed {minimum}")]
    WidthTooSmall { width: Box<Rational>, minimum: Box<Rational> },

    #[error("directions must have distinct slopes")]
    ParallelDirections,

    #[error("set does not belong to this system")]
    ForeignSet,

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("invalid rotation angles: {0}")]
    InvalidAngles(String),

    #[error("cuts must be strictly increasing and lie in [0, 1)")]
    UnsortedCuts,

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("partitions have different cell counts ({left} vs {right})")]
    CellCountMismatch { left: usize, right: usize },

    #[error("partition {index} does not refine partition {previous}")]
    RefinementViolation { previous: usize, index: usize },

    #[error("candidate window m in ({after}, {last}] contains no strip point")]
    EmptyCandidateWindow { after: i64, last: i64 },

    #[error("distance matrix is not symmetric with zero diagonal at ({row}, {col})")]
    NonSymmetricMatrix { row: usize, col: usize },

    #[error("invalid window schedule: {0}")]
    InvalidSchedule(String),

    #[error("cannot parse rational from {0:?}")]
    ParseRational(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Errors caused by strip geometry that admits no valid lattice point.
    pub fn is_infeasible_geometry(&self) -> bool {
        matches!(
            self,
            Error::InfeasiblePoint { .. }
                | Error::WidthTooSmall { .. }
                | Error::EmptyCandidateWindow { .. }
                | Error::ParallelDirections
        )
    }
}
