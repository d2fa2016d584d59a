use thiserror::Error;

use crate::extended::SeparabilityReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("prior sums to {0} \u{2260} 1")]
    PriorSum(String),

    #[error("{what} index {index} out of range (< {bound})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        bound: usize,
    },

    #[error("outcome does not match the game: {0}")]
    OutcomeMismatch(String),

    #[error("invalid message profile: {0}")]
    InvalidProfile(String),

    #[error("coalition bound k={k} must satisfy 1 <= k <= {n}")]
    InvalidK { k: usize, n: usize },

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("outcome violates order constraint {from} <= {to} ({from_value} > {to_value})")]
    OrderViolation {
        from: String,
        to: String,
        from_value: String,
        to_value: String,
    },

    #[error("enumeration needs {required} steps, cap is {cap}")]
    CapExceeded { required: u128, cap: u128 },

    #[error("game is not {k}-separable")]
    NotSeparable { k: usize, report: Box<SeparabilityReport> },

    #[error("internal error: {0}")]
    Internal(String),
}
