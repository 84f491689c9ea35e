//! Error type shared by every module.

use thiserror::Error;

/// Failure modes of the laboratory. Each variant maps to a stable
/// machine-readable kind via [`PilError::kind`].
#[derive(Debug, Error, Clone, PartialEq)]
pub enum PilError {
    #[error("height field leaves the chart: max|gamma| = {max_abs:.6e} >= delta0 = {delta0:.6e}")]
    ChartOverflow { max_abs: f64, delta0: f64 },
    #[error("degenerate metric: det g = {det:.6e} at grid point {index}")]
    DegenerateMetric { det: f64, index: usize },
    #[error("non-finite input in {what}")]
    NonFiniteInput { what: String },
    #[error("Newton iteration diverged after {iterations} iterations (residual {residual:.6e})")]
    NewtonDiverged { iterations: usize, residual: f64 },
    #[error("folded coordinate map: Jacobian {det:.6e} at bulk point {index}")]
    FoldedMap { det: f64, index: usize },
    #[error("elliptic solve did not converge: {iterations} iterations, relative residual {residual:.6e}")]
    EllipticNoConverge { iterations: usize, residual: f64 },
    #[error("operator is singular on constants")]
    SingularInverse,
    #[error("negative eigenvalue {value:.6e} in symmetrized surface operator")]
    NegativeEigenvalue { value: f64 },
    #[error("incompatible data: {detail}")]
    IncompatibleData { detail: String },
    #[error("transversality lost: min nu.n = {min_dot:.6e}")]
    TransversalityLoss { min_dot: f64 },
    #[error("step rejected at t = {t:.6e}: {reason}")]
    StepRejected { t: f64, reason: Box<PilError> },
    #[error("identity residuals requested on a filtered trajectory")]
    FilterContamination,
    #[error("parse error: {0}")]
    ParseError(String),
    #[error("invalid value at `{path}`: {message}")]
    ValidationError { path: String, message: String },
    #[error("io error: {0}")]
    IoError(String),
    #[error("checkpoint version mismatch: found {found}, expected {expected}")]
    VersionMismatch { found: String, expected: String },
}

impl PilError {
    /// Stable identifier used in CLI error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            PilError::ChartOverflow { .. } => "ChartOverflow",
            PilError::DegenerateMetric { .. } => "DegenerateMetric",
            PilError::NonFiniteInput { .. } => "NonFiniteInput",
            PilError::NewtonDiverged { .. } => "NewtonDiverged",
            PilError::FoldedMap { .. } => "FoldedMap",
            PilError::EllipticNoConverge { .. } => "EllipticNoConverge",
            PilError::SingularInverse => "SingularInverse",
            PilError::NegativeEigenvalue { .. } => "NegativeEigenvalue",
            PilError::IncompatibleData { .. } => "IncompatibleData",
            PilError::TransversalityLoss { .. } => "TransversalityLoss",
            PilError::StepRejected { .. } => "StepRejected",
            PilError::FilterContamination => "FilterContamination",
            PilError::ParseError(_) => "ParseError",
            PilError::ValidationError { .. } => "ValidationError",
            PilError::IoError(_) => "IoError",
            PilError::VersionMismatch { .. } => "VersionMismatch",
        }
    }

    pub(crate) fn validation(path: &str, message: impl Into<String>) -> Self {
        PilError::ValidationError { path: path.to_string(), message: message.into() }
    }
}

impl From<std::io::Error> for PilError {
    fn from(e: std::io::Error) -> Self {
        PilError::IoError(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, PilError>;

/// Reject NaN/Inf eagerly.
pub(crate) fn ensure_finite(what: &str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(PilError::NonFiniteInput { what: what.to_string() })
    }
}
