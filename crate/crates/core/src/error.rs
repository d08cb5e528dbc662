use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("no convergence: {what} (achieved {achieved:e})")]
    NonConvergence { what: String, achieved: f64 },

    #[error("numerical budget exceeded: {what} (achievable {achievable:e})")]
    Budget { what: String, achievable: f64 },

    #[error("symbol not certified zero-free: min modulus {min_modulus:e} <= threshold {threshold:e}")]
    ZeroFree { min_modulus: f64, threshold: f64 },

    #[error("kernel support half-width {support} exceeds the bound {bound} for this order")]
    SupportViolation { support: f64, bound: f64 },

    #[error("spline order mismatch: expected sigma={expected}, found sigma={found}")]
    OrderMismatch { expected: f64, found: f64 },

    #[error("averaging kernel of the samples does not match the spline kernel")]
    KernelMismatch,

    #[error("evaluation point {t} outside the cached span {span}")]
    OutOfCache { t: f64, span: f64 },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Coarse classification used by front ends to choose an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Certificate,
    Budget,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::ZeroFree { .. } | Error::SupportViolation { .. } => ErrorClass::Certificate,
            Error::NonConvergence { .. } | Error::Budget { .. } | Error::OutOfCache { .. } => {
                ErrorClass::Budget
            }
            _ => ErrorClass::Config,
        }
    }

    /// Short machine-parsable tag for diagnostics.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::NonConvergence { .. } => "non_convergence",
            Error::Budget { .. } => "budget",
            Error::ZeroFree { .. } => "zero_free",
            Error::SupportViolation { .. } => "support_violation",
            Error::OrderMismatch { .. } => "order_mismatch",
            Error::KernelMismatch => "kernel_mismatch",
            Error::OutOfCache { .. } => "out_of_cache",
            Error::InvalidKernel(_) => "invalid_kernel",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
