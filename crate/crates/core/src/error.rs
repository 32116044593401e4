use thiserror::Error;

use crate::scheduling::CycleId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("route is not a simple polyline: {0}")]
    NonSimpleRoute(String),

    /// Some pair sits within the tolerance band around the visibility radius.
    #[error("degenerate scenario: robots {a} and {b} at squared distance {squared_distance} at t={time} (cycle {cycle})")]
    Degenerate {
        a: usize,
        b: usize,
        squared_distance: f64,
        time: f64,
        cycle: CycleId,
    },

    #[error("collision: robots {a} and {b} share a point at t={time}")]
    Collision { a: usize, b: usize, time: f64 },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
