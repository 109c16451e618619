use serde::Serialize;

use super::covariance::{partial_transpose, symplectic_eigenvalues, CovarianceMatrix};
use crate::error::Result;

/// Relative band around `ν̃₋ = 1/2` that is reported as exactly 1/2.
///
/// States on the separability boundary (vacuum, pure local squeezing) come out
/// of the Lyapunov solver a few ulps away from 1/2; without the band their
/// logarithmic negativity would be rounding noise of either sign.
pub const THRESHOLD_BAND: f64 = 1e-12;

/// Smallest partially-transposed symplectic eigenvalue and the logarithmic negativity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntanglementResult {
    pub nu_minus: f64,
    pub log_negativity: f64,
    pub entangled: bool,
}

impl EntanglementResult {
    /// `E_N = max{0, -log2(2 ν̃₋)}`.
    pub fn from_nu_minus(nu_minus: f64) -> Self {
        let nu_minus = if (2.0 * nu_minus - 1.0).abs() <= THRESHOLD_BAND {
            0.5
        } else {
            nu_minus
        };
        let log_negativity = if nu_minus < 0.5 {
            -(2.0 * nu_minus).log2()
        } else {
            0.0
        };
        Self {
            nu_minus,
            log_negativity,
            entangled: nu_minus < 0.5,
        }
    }
}

pub fn log_negativity(v: &CovarianceMatrix) -> Result<EntanglementResult> {
    let [nu_minus, _] = symplectic_eigenvalues(&partial_transpose(v))?;
    Ok(EntanglementResult::from_nu_minus(nu_minus))
}
