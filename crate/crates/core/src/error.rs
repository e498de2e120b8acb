use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("derived quantity `{field}` is not finite ({value})")]
    NonFinite { field: &'static str, value: f64 },

    #[error("zero-likelihood outcome: conditional norm {norm:e} below threshold")]
    ZeroLikelihood { norm: f64 },

    #[error("grid under-resolved: normalization drift {drift:e}; try at least {suggested_points} points")]
    UnderResolved { drift: f64, suggested_points: usize },

    #[error("plant is not strictly stable: {0}")]
    UnstablePlant(String),

    #[error("root finding did not converge for degree {degree} after {iterations} iterations (coefficient spread {spread:e})")]
    RootFinding {
        degree: usize,
        iterations: usize,
        spread: f64,
    },

    #[error("spectrum has a zero or pole on the real axis near omega = {omega:e}")]
    RealAxisRoot { omega: f64 },

    #[error("spectrum is not a valid even, positive rational function: {0}")]
    InvalidSpectrum(String),

    #[error("kernel tail {tail_ratio:e} of peak at horizon; use a horizon of at least {suggested_horizon:e} s")]
    HorizonTooShort {
        tail_ratio: f64,
        suggested_horizon: f64,
    },

    #[error("Riccati iteration failed: {0}")]
    Riccati(String),

    #[error("kernel invariant violated: {0}")]
    KernelInvariant(String),

    #[error("rejection sampler acceptance rate {rate:e} is below 1e-3")]
    LowAcceptance { rate: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
