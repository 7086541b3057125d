use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("site {site} out of range for a chain of {nsites} spins")]
    SiteOutOfRange { site: usize, nsites: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite entries in {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (max deviation {deviation:.3e})")]
    NotHermitian { deviation: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("positivity violated at t = {time:.6e} s: eigenvalue {eigenvalue:.3e}")]
    Positivity { time: f64, eigenvalue: f64 },

    #[error("state invariant violated at t = {time:.6e} s: {what}")]
    StateInvariant { time: f64, what: String },

    #[error("reconstructed channel is not trace preserving (deviation {deviation:.3e})")]
    NotTracePreserving { deviation: f64 },

    #[error("trajectory carries no target metadata")]
    MissingMetadata,

    #[error("every sweep point failed")]
    AllPointsFailed,
}

pub type Result<T> = std::result::Result<T, Error>;
