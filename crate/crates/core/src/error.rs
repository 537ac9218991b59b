use thiserror::Error;

use crate::point::Point;

/// Which of the two families an error or report refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum FamilyLabel {
    A,
    B,
}

impl std::fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FamilyLabel::A => write!(f, "A"),
            FamilyLabel::B => write!(f, "B"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate in point")]
    NonFinite,

    #[error("invalid set: {0}")]
    InvalidSet(String),

    #[error("ellipsoid projection did not converge after {iterations} iterations (residual {residual:e})")]
    EllipsoidNoConvergence { iterations: usize, residual: f64 },

    #[error("steering parameter {0} outside (0,1)")]
    TauOutOfRange(f64),

    #[error("invalid steering schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("family is empty")]
    EmptyFamily,

    #[error("S-HLWB iteration hit max_iter with gap {gap:e}")]
    MaxIterExceeded { last: Point, gap: f64 },

    #[error("unbounded: no bounded member{}", .0.map(|l| format!(" in family {l}")).unwrap_or_default())]
    Unbounded(Option<FamilyLabel>),

    #[error("family {0} appears to have an empty intersection (worst member violation {violation:e})", violation = .1)]
    EmptyIntersection(FamilyLabel, f64),

    #[error("families not disjoint: estimated distance {0:e}")]
    NotDisjoint(f64),

    #[error("trace too short: {0}")]
    TraceTooShort(&'static str),

    #[error("Cheney-Goldstein baseline did not settle after {outer} outer iterations (last step {step:e})")]
    MaxOuterExceeded { outer: usize, step: f64 },

    #[error("oracle limited to dimension <= 3, got {0}")]
    DimensionTooLarge(usize),

    #[error("no feasible grid point for family {0} at this resolution")]
    NoFeasiblePoint(FamilyLabel),

    #[error("pair gap is zero; separation check needs a positive gap")]
    PreconditionGapZero,

    #[error("rejection sampling failed for family {0} after {1} proposals")]
    SamplingFailure(FamilyLabel, usize),

    #[error("misclassified audit point #{index}: {reason}")]
    MisclassifiedPoint { index: usize, reason: String },

    #[error("Dykstra projection did not converge after {0} cycles")]
    DykstraNoConvergence(usize),

    #[error("problem file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
