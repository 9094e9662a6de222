use thiserror::Error;

/// Errors raised across the toolkit.
///
/// Mathematical-property failures that belong in a report (a failed axiom,
/// a failed core condition) are not errors; they are returned as data.
/// These variants cover violated preconditions and impossible constructions.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not hermitian (asymmetry {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eig:.3e})")]
    NotPsd { min_eig: f64 },

    #[error("matrices {first} and {second} do not commute (commutator {residual:.3e})")]
    NotCommuting {
        first: usize,
        second: usize,
        residual: f64,
    },

    #[error("joint diagonalization residual {residual:.3e} exceeds tolerance")]
    DiagonalizationFailed { residual: f64 },

    #[error("malformed input: {0}")]
    MalformedInput(String),

    #[error("product of basis elements {left} and {right} is not defined")]
    NotInGamma { left: usize, right: usize },

    #[error("element is zero")]
    ZeroElement,

    #[error("vector is not in the domain of the map (distance {residual:.3e})")]
    NotInDomain { residual: f64 },

    #[error("tensor is not hermitian-symmetric (residual {residual:.3e})")]
    NotHermitianSymmetric { residual: f64 },

    #[error("not a representation: {0}")]
    NotARepresentation(String),

    #[error("algebra is not total: product of basis elements {left} and {right} is undefined")]
    PartialProductUndefined { left: usize, right: usize },

    #[error("map is not completely positive (min eigenvalue {min_eig:.3e})")]
    NotCompletelyPositive { min_eig: f64 },

    #[error("core violation: {0}")]
    CoreViolation(String),

    #[error("induced representation is not well defined ({kind}, residual {residual:.3e})")]
    WellDefinednessViolation { kind: String, residual: f64 },

    #[error("unit is not in the core")]
    UnitNotInCore,

    #[error("dilations are not unitarily equivalent: {0}")]
    NotEquivalent(String),

    #[error("arity mismatch: expected {expected} variables, got {got}")]
    ArityMismatch { expected: usize, got: usize },

    #[error("polynomial matrix {index} is not positive semidefinite at {point:?} (min eigenvalue {min_eig:.3e})")]
    NotPositiveDefinite {
        index: usize,
        point: Vec<f64>,
        min_eig: f64,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::MalformedInput(e.to_string())
    }
}
