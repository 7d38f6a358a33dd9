use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what} is not Hermitian: max |A - A^H| = {residual:e}")]
    NonHermitian { what: &'static str, residual: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("Hermitian eigensolver did not converge for a {dim}x{dim} matrix (max |A| = {scale:e})")]
    EigenNoConvergence { dim: usize, scale: f64 },

    #[error("invalid correlation matrix: {0}")]
    InvalidCorrelation(String),

    #[error("invalid configuration `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("{what} = {value} lies outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("quadrature did not converge: estimated error {achieved:e} > requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("{modes} modes exceed the Fock-space cap of {cap}")]
    TooManyModes { modes: usize, cap: usize },

    #[error("averaging window [{lo}, {hi}] holds {found} samples, at least {required} required")]
    InsufficientSamples {
        lo: f64,
        hi: f64,
        found: usize,
        required: usize,
    },

    #[error("bath index must be 1 or 2, got {0}")]
    InvalidBathIndex(u8),

    #[error("observable is not supported on bath modes only: {0}")]
    NotBathSupported(String),

    #[error("trace expected to be real has imaginary part {imag:e}")]
    NonReal { imag: f64 },

    #[error("realization {realization} at gamma = {gamma} ({kind}) failed: {source}")]
    Realization {
        gamma: f64,
        kind: &'static str,
        realization: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.into(),
            reason: reason.into(),
        }
    }

    /// True for failures caused by bad input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        match self {
            Error::InvalidConfig { .. } | Error::InvalidBathIndex(_) | Error::TooManyModes { .. } => {
                true
            }
            Error::Realization { source, .. } => source.is_config(),
            _ => false,
        }
    }
}
