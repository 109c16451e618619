//! Closed forms for the symmetric resonant case.
//!
//! Equal frequencies `ω`, equal decay rates `γ`, equal squeezing `r` and
//! aligned squeezing phases `φ1 = φ2` (any common value: a common phase is a
//! global quadrature rotation and leaves the spectrum unchanged). Both baths
//! share the temperature `T`, entering through `y = 2 nbar + 1 = coth(ω / 2T)`.
//!
//! With `K = cosh 2r`, `S = sinh 2r`, `χ = 2γJ / (γ² + 4J²)`, `μ = γ² / (γ² + 4J²)`:
//!
//! * `ν̃₋ = (y/2) R(r, J)` with `R = sqrt(K² - μ² S²) - χ S`,
//! * the state is entangled iff `y R < 1`,
//! * `T_c = ω / (2 artanh R)` when `R < 1`.

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::numeric::{bisect_root, golden_section_min};

/// Bisection tolerance (in `r` and in `T`) for boundary and critical-temperature searches.
pub const ROOT_TOL: f64 = 1e-10;

/// `R >= 1 - ARTANH_GUARD` is treated as "never entangled".
pub const ARTANH_GUARD: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetricCase {
    pub omega: f64,
    pub gamma: f64,
    pub coupling: f64,
    pub r: f64,
    pub temperature: f64,
}

impl SymmetricCase {
    pub fn new(omega: f64, gamma: f64, coupling: f64, r: f64, temperature: f64) -> Result<Self> {
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid("omega", "must be > 0"));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid("gamma", "must be > 0"));
        }
        if !(coupling >= 0.0 && coupling.is_finite()) {
            return Err(invalid("J", "must be >= 0"));
        }
        if !(r >= 0.0 && r.is_finite()) {
            return Err(invalid("r", "must be >= 0"));
        }
        if !(temperature >= 0.0) {
            return Err(invalid("T", "must be >= 0"));
        }
        Ok(Self {
            omega,
            gamma,
            coupling,
            r,
            temperature,
        })
    }

    pub fn y(&self) -> f64 {
        thermal_y(self.omega, self.temperature)
    }

    pub fn intermediates(&self) -> AnalyticIntermediates {
        AnalyticIntermediates::new(self.gamma, self.coupling, self.r, self.y())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticIntermediates {
    pub k: f64,
    pub s: f64,
    pub chi: f64,
    pub mu: f64,
    pub y: f64,
}

impl AnalyticIntermediates {
    pub fn new(gamma: f64, coupling: f64, r: f64, y: f64) -> Self {
        let denom = gamma * gamma + 4.0 * coupling * coupling;
        Self {
            k: (2.0 * r).cosh(),
            s: (2.0 * r).sinh(),
            chi: 2.0 * gamma * coupling / denom,
            mu: gamma * gamma / denom,
            y,
        }
    }

    /// `R = sqrt(K² - μ² S²) - χ S`, evaluated as `sqrt(1 + (1 - μ²) S²) - χ S`
    /// using `K² = 1 + S²` and `1 - μ = χ²/μ`, which keeps full precision at
    /// weak coupling where `μ -> 1`.
    pub fn r_value(&self) -> f64 {
        let Self { s, chi, mu, .. } = *self;
        let one_minus_mu = chi * chi / mu;
        (1.0 + one_minus_mu * (1.0 + mu) * s * s).sqrt() - chi * s
    }
}

/// `y = coth(ω / 2T)`, with `y = 1` exactly at `T = 0`.
pub fn thermal_y(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 1.0;
    }
    let x = omega / (2.0 * temperature);
    if x > 20.0 {
        // coth x = 1 + 2e^{-2x} + O(e^{-4x})
        return 1.0 + 2.0 * (-2.0 * x).exp();
    }
    1.0 / x.tanh()
}

/// Thermal occupation `nbar = (y - 1)/2 = 1/(e^{ω/T} - 1)`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    1.0 / (omega / temperature).exp_m1()
}

/// `R(r, J) = sqrt(K² - μ² S²) - χ S`.
pub fn r_function(gamma: f64, coupling: f64, r: f64) -> f64 {
    AnalyticIntermediates::new(gamma, coupling, r, 1.0).r_value()
}

pub fn nu_minus_analytic(case: &SymmetricCase) -> f64 {
    0.5 * case.y() * r_function(case.gamma, case.coupling, case.r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum CriticalTemperature {
    Finite(f64),
    /// Separable at every temperature, including `T = 0`.
    NoEntanglement,
}

impl CriticalTemperature {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(t) => Some(*t),
            Self::NoEntanglement => None,
        }
    }
}

/// Temperature at which `y(T) R = 1`, from the closed form `ω / (2 artanh R)`.
pub fn critical_temperature(gamma: f64, coupling: f64, r: f64, omega: f64) -> CriticalTemperature {
    critical_temperature_from_r(r_function(gamma, coupling, r), omega)
}

pub(crate) fn critical_temperature_from_r(big_r: f64, omega: f64) -> CriticalTemperature {
    if !(big_r < 1.0 - ARTANH_GUARD) {
        return CriticalTemperature::NoEntanglement;
    }
    let artanh = 0.5 * ((1.0 + big_r) / (1.0 - big_r)).ln();
    CriticalTemperature::Finite(omega / (2.0 * artanh))
}

/// Same threshold found by bisection on `y(T) R - 1`, without the `artanh` inversion.
pub fn critical_temperature_bisection(
    gamma: f64,
    coupling: f64,
    r: f64,
    omega: f64,
    tol: f64,
) -> CriticalTemperature {
    let big_r = r_function(gamma, coupling, r);
    if !(big_r < 1.0 - ARTANH_GUARD) {
        return CriticalTemperature::NoEntanglement;
    }
    let excess = |t: f64| thermal_y(omega, t) * big_r - 1.0;
    let mut hi = omega;
    while excess(hi) < 0.0 {
        hi *= 2.0;
    }
    CriticalTemperature::Finite(bisect_root(0.0, hi, tol, excess))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimumRegime {
    /// Closed-form stationary point of `R` in `r`.
    Stationary,
    /// `1 - μ² - χ² <= 0` (only at `J = 0`); located by golden-section search.
    NumericFallback,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalSqueezing {
    pub r_opt: f64,
    pub r_value: f64,
    pub regime: OptimumRegime,
}

/// Minimizer of `R(r, J)` over `r >= 0`.
///
/// Setting `dR/dr = 0` gives `S (1 - μ²) = χ sqrt(K² - μ² S²)`, i.e.
/// `sinh²(2r*) = χ² / [(1 - μ²)(1 - μ² - χ²)]`.
pub fn optimal_squeezing(gamma: f64, coupling: f64) -> OptimalSqueezing {
    let ai = AnalyticIntermediates::new(gamma, coupling, 0.0, 1.0);
    let (chi, mu) = (ai.chi, ai.mu);
    // χ² + μ² = μ, so 1 - μ² - χ² = 1 - μ = 4J² / (γ² + 4J²); written out to
    // avoid cancellation at weak coupling
    let one_minus_mu = 4.0 * coupling * coupling / (gamma * gamma + 4.0 * coupling * coupling);
    if one_minus_mu > 0.0 && chi > 0.0 {
        let s2 = chi * chi / ((1.0 + mu) * one_minus_mu * one_minus_mu);
        let r_opt = 0.5 * s2.sqrt().asinh();
        return OptimalSqueezing {
            r_opt,
            r_value: r_function(gamma, coupling, r_opt),
            regime: OptimumRegime::Stationary,
        };
    }
    let (r_opt, r_value) = golden_section_min(0.0, 5.0, 1e-10, |r| r_function(gamma, coupling, r));
    // R is non-decreasing when χ = 0, so the boundary is the optimum
    let (r_opt, r_value) = if r_function(gamma, coupling, 0.0) <= r_value {
        (0.0, r_function(gamma, coupling, 0.0))
    } else {
        (r_opt, r_value)
    };
    OptimalSqueezing {
        r_opt,
        r_value,
        regime: OptimumRegime::NumericFallback,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EntangledWindow {
    /// `y R(r) < 1` on the open interval `(low, high)`.
    Interval { low: f64, high: f64 },
    Empty,
}

/// Squeezing interval with `y R(r, J) < 1`, by bisection on both sides of `r*`.
pub fn entanglement_boundary(gamma: f64, coupling: f64, y: f64) -> EntangledWindow {
    let opt = optimal_squeezing(gamma, coupling);
    let excess = |r: f64| y * r_function(gamma, coupling, r) - 1.0;
    if excess(opt.r_opt) >= 0.0 {
        return EntangledWindow::Empty;
    }
    let low = if excess(0.0) <= 0.0 {
        0.0
    } else {
        bisect_root(0.0, opt.r_opt, ROOT_TOL, excess)
    };
    let mut far = (2.0 * opt.r_opt).max(0.1);
    while excess(far) < 0.0 {
        far *= 2.0;
    }
    let high = bisect_root(opt.r_opt, far, ROOT_TOL, excess);
    EntangledWindow::Interval { low, high }
}
