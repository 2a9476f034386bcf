//! Error types shared by every module of the crate.

use thiserror::Error;

/// Crate-wide error type.
///
/// The variants map onto the failure classes the experiment drivers care
/// about: bad parameters, mismatched group dimensions, work estimates above
/// the configured budget, a growth-schedule violation, and a Cantor level
/// that produced an empty family of children.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: left operand has {left} horizontal coordinates, right has {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("resource budget exceeded: estimated work {estimate:.3e} above ceiling {budget:.3e}")]
    ResourceBudget { estimate: f64, budget: f64 },

    #[error("scale schedule violation: {0}")]
    ScheduleViolation(String),

    #[error("degenerate level: extending to scale {scale} left parent box #{parent} with no children")]
    DegenerateLevel { scale: u64, parent: usize },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
