//! Error types shared across the crate.

use std::path::PathBuf;
use thiserror::Error;

/// Errors from parameter validation and non-dimensionalization.
#[derive(Debug, Error)]
pub enum DomainError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },
    #[error("emission rate is unreachable: set either `f_r` or the `a_f` override")]
    MissingEmissionRate,
    #[error("configuration is already dimensionless; refusing to rescale twice")]
    AlreadyDimensionless,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
}

/// Errors from time-series ingestion and signal construction.
#[derive(Debug, Error)]
pub enum SignalError {
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("normalization impossible: signal integrates to zero after clamping")]
    NormalizationImpossible,
    #[error("expected a {expected} series, got {got}")]
    KindMismatch {
        expected: &'static str,
        got: &'static str,
    },
    #[error("sample times must be strictly increasing within [0,1): {0}")]
    NonMonotonicTimes(String),
    #[error("negative value {value} at t={time} in a {kind} series")]
    NegativeValue {
        kind: &'static str,
        time: f64,
        value: f64,
    },
    #[error("invalid solar events: {0}")]
    InvalidEvents(String),
    #[error("no data in the requested window")]
    NoData,
    #[error("daily series do not share a sampling grid: {0}")]
    GridMismatch(String),
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Errors from meshing, assembly and point evaluation.
#[derive(Debug, Error)]
pub enum FemError {
    #[error("invalid geometry for meshing: {0}")]
    InvalidGeometry(String),
    #[error("no boundary operator is defined for the no-flux segment")]
    UnsupportedBoundaryTag,
    #[error("load region [{x0},{x1}]x[{y0},{y1}] extends outside the domain")]
    RegionOutsideDomain { x0: f64, x1: f64, y0: f64, y1: f64 },
    #[error("point ({x}, {y}) is outside the domain")]
    PointOutsideDomain { x: f64, y: f64 },
    #[error("operator flagged symmetric has asymmetry defect {defect:e}")]
    AsymmetricOperator { defect: f64 },
    #[error("field has {got} coefficients, mesh has {expected} nodes")]
    FieldSizeMismatch { expected: usize, got: usize },
    #[error("non-finite coefficient in field")]
    NonFiniteField,
}

/// Linear-solver failure with the residual reached.
#[derive(Debug, Error)]
#[error(
    "linear solve did not converge: relative residual {residual:e} after {iterations} iterations"
)]
pub struct SolveError {
    pub iterations: usize,
    pub residual: f64,
}

/// Errors from the simulation driver.
#[derive(Debug, Error)]
pub enum SolverError {
    #[error("configuration must be dimensionless before running (call nondimensionalize)")]
    NotDimensionless,
    #[error("signal `{0}` must be normalized to unit integral")]
    NotNormalized(&'static str),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("parameter sweep needs at least one value")]
    EmptySweep,
}

/// Errors from metric evaluation.
#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("measurement norm is zero; relative discrepancy is undefined")]
    ZeroDenominator,
    #[error("probe series needs at least two samples, got {0}")]
    TooFewSamples(usize),
}

/// Errors from parameter identification.
#[derive(Debug, Error)]
pub enum FitError {
    #[error("invalid search interval: {0}")]
    InvalidInterval(String),
    #[error("scan needs at least one value")]
    EmptyScan,
    #[error("fixed kappa must be positive, got {0}")]
    NonPositiveKappa(f64),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Errors from configuration loading.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {reason}")]
    Parse { path: PathBuf, reason: String },
    #[error("referenced file does not exist: {0}")]
    MissingFile(PathBuf),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Any error the crate can produce.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Fem(#[from] FemError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

impl Error {
    /// True for failures of the numerical machinery (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Solve(_) => true,
            Error::Solver(SolverError::Solve(_)) | Error::Solver(SolverError::Fem(_)) => true,
            Error::Fit(FitError::Solver(e)) => {
                matches!(e, SolverError::Solve(_) | SolverError::Fem(_))
            }
            _ => false,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
