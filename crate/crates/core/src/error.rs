//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidStateSpace(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid belief: {0}")]
    InvalidBelief(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },

    #[error("belief has empty support")]
    EmptySupport,

    #[error("event has null prior mass ({mass:e})")]
    NullEvent { mass: f64 },

    #[error("sigma evaluated outside its domain at x = {0}")]
    DomainError(f64),

    #[error("distortion table has no entry for probability {0}")]
    TableMiss(f64),

    #[error("solver did not converge after {iters} iterations (movement {movement:e})")]
    NoConvergence { iters: usize, movement: f64 },

    #[error("posterior undefined: {0}")]
    UndefinedPosterior(String),

    #[error("no ladder level or atom gives the event positive mass: {0}")]
    Unreachable(String),

    #[error("invalid ladder: {0}")]
    InvalidLadder(String),

    #[error("family is not a conditional probability system: {0}")]
    NotCps(String),

    #[error("event {0} is missing from the family")]
    MissingEvent(String),

    #[error("hypothesis-testing construction failed: {0}")]
    ConstructionFailed(String),

    #[error("observed ratios are inconsistent: {0}")]
    Inconsistent(String),

    #[error("mixing weight differs across events: {0:?}")]
    GammaMismatch(Vec<(String, f64)>),

    #[error("revealed-preference cycle through events {0:?}")]
    CycleFound(Vec<String>),

    #[error("grether posterior has zero denominator for message {0}")]
    ZeroDenominator(String),

    #[error("degenerate persuasion problem: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("per-event failures: {0:?}")]
    Family(Vec<(String, Error)>),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short variant name, used by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidStateSpace(_) => "InvalidStateSpace",
            Error::InvalidEvent(_) => "InvalidEvent",
            Error::InvalidBelief(_) => "InvalidBelief",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::EmptySupport => "EmptySupport",
            Error::NullEvent { .. } => "NullEvent",
            Error::DomainError(_) => "DomainError",
            Error::TableMiss(_) => "TableMiss",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::UndefinedPosterior(_) => "UndefinedPosterior",
            Error::Unreachable(_) => "Unreachable",
            Error::InvalidLadder(_) => "InvalidLadder",
            Error::NotCps(_) => "NotCPS",
            Error::MissingEvent(_) => "MissingEvent",
            Error::ConstructionFailed(_) => "ConstructionFailed",
            Error::Inconsistent(_) => "Inconsistent",
            Error::GammaMismatch(_) => "GammaMismatch",
            Error::CycleFound(_) => "CycleFound",
            Error::ZeroDenominator(_) => "ZeroDenominator",
            Error::Degenerate(_) => "Degenerate",
            Error::Precondition(_) => "Precondition",
            Error::Family(_) => "Family",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }

    /// True for errors caused by malformed input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidStateSpace(_)
                | Error::InvalidEvent(_)
                | Error::InvalidBelief(_)
                | Error::InvalidParameter(_)
                | Error::ShapeMismatch { .. }
                | Error::InvalidLadder(_)
                | Error::Io(_)
                | Error::Parse(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
