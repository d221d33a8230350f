use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameters: {}", join(.0))]
    InvalidParams(Vec<Violation>),
    #[error("covariance factorization failed at index {index}: radicand {radicand} is not positive")]
    NonPositiveDefinite { index: usize, radicand: f64 },
    #[error("2x2 covariance is not positive definite")]
    NotPositiveDefinite,
    #[error("r = 0: agreement counts carry no information, pick a detector direction explicitly")]
    Uninformative,
    #[error("H1 variance {variance} is negative under the paper-literal moments")]
    NegativeVariance { variance: f64 },
    #[error("bit matrix has {rows} x {cols} entries, expected {expected_rows} x {expected_cols}")]
    DimensionMismatch { rows: usize, cols: usize, expected_rows: usize, expected_cols: usize },
    #[error("bit matrix needs at least 1 sensor and 2 samples, got {rows} x {cols}")]
    TooSmall { rows: usize, cols: usize },
    #[error("trials ≥ 1 required")]
    NoTrials,
    #[error("thresholds must be non-empty and strictly increasing")]
    BadThresholds,
}

fn join(violations: &[Violation]) -> String {
    violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}
