//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// Schema-level JSON failure; serde's message names the offending field.
    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    /// A domain invariant does not hold (e.g. "speed < 0").
    #[error("validation error: {0}")]
    Validation(String),

    /// The requested distance cannot be covered before the planning horizon.
    #[error("horizon exceeded: {distance} km unreachable departing at {depart} min")]
    HorizonExceeded { distance: f64, depart: f64 },

    /// Speed would go negative inside a constant-acceleration segment.
    #[error("invalid segment: {0}")]
    InvalidSegment(String),

    /// Zero-width profile interval passed to a per-interval operation.
    #[error("degenerate interval: index {0} has zero width")]
    DegenerateInterval(usize),

    /// No contiguous partition of the giant tour satisfies all constraints.
    #[error("infeasible tour: no feasible partition into at most {fleet_size} routes")]
    InfeasibleTour { fleet_size: usize },

    /// Repair could not place a customer and the fleet is exhausted.
    #[error("insertion failed: customer {customer} has no feasible position")]
    InsertionFailed { customer: usize },

    /// Instance is larger than an exhaustive procedure is willing to handle.
    #[error("size error: n = {n} exceeds the exhaustive-search guard of {max}")]
    SizeGuard { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
