use thiserror::Error;

use crate::report::ViolationReport;

pub type Result<T> = std::result::Result<T, QpbError>;

/// Errors raised while evaluating spaces, maps and scenarios.
///
/// Scalar payloads are widened to `f64` so the error type does not depend on
/// the scalar parameter of the caller.
#[derive(Debug, Clone, Error)]
pub enum QpbError {
    /// A distance, map, or comparison function produced NaN or an infinity.
    #[error("non-finite value from {what} at {points:?}")]
    NonFinite { what: String, points: Vec<f64> },

    /// A self map sent a point outside the scenario domain.
    #[error("map {map} sends x = {input} to {output}, outside the domain {domain}")]
    OutsideDomain {
        map: String,
        input: f64,
        output: f64,
        domain: String,
    },

    /// A parameter violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Metric-mode solving requires a symmetric distance with zero self-distance and s = 1.
    #[error("metric mode rejected: {reason} ({} witnesses)", report.witnesses.len())]
    MetricModeRejected {
        reason: String,
        report: Box<ViolationReport<f64>>,
    },
}
