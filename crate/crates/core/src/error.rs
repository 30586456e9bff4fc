use thiserror::Error;

/// Errors raised by the simulation core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is empty")]
    Empty,

    #[error("non-finite entry produced by {0}")]
    NonFinite(&'static str),

    #[error("operator `{label}` is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { label: String, deviation: f64 },

    #[error("eigendecomposition did not converge")]
    EigenNonConvergence,

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("site {site} out of range for {sites} qubit sites")]
    SiteOutOfRange { site: usize, sites: usize },

    #[error("Hilbert space has no bosonic mode")]
    NoFockMode,

    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),

    #[error("malformed ket `{spec}`: {reason}")]
    MalformedKet { spec: String, reason: String },

    #[error("ket label `{0}` out of range")]
    LabelOutOfRange(String),

    #[error("invalid probability distribution: {0}")]
    InvalidDistribution(String),

    #[error("operation requires a pure state")]
    RequiresPure,

    #[error("empty state list")]
    EmptyStates,

    #[error("term `{0}` has zero Schatten-inf norm")]
    ZeroNormTerm(String),
}

pub type SimResult<T> = Result<T, SimError>;
