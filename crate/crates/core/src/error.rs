use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    /// The drift has an eigenvalue with non-negative real part, so no steady state exists.
    #[error("drift matrix is not Hurwitz (max real part of spectrum = {max_real_part:e})")]
    NotStable { max_real_part: f64 },

    #[error("matrix is not positive definite (smallest eigenvalue = {min_eigenvalue:e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("matrix is not symmetric (max asymmetry = {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    /// |M| exceeds sqrt(N(N+1)), or the per-step noise covariance is indefinite.
    #[error("unphysical bath: {0}")]
    UnphysicalBath(String),

    #[error("periodic steady state did not converge within {periods} periods (residual {residual:e})")]
    NoConvergence { periods: usize, residual: f64 },

    #[error("step size {dt:e} exceeds the resolution floor {max_dt:e}")]
    StepTooLarge { dt: f64, max_dt: f64 },

    #[error("laboratory-frame problems require omega1 == omega2 (got {omega1} and {omega2})")]
    NonResonant { omega1: f64, omega2: f64 },

    #[error("entanglement criterion is not monotone in temperature near T = {temperature}")]
    NonMonotone { temperature: f64 },

    #[error("numerical failure: {0}")]
    Numerical(&'static str),
}

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
}
