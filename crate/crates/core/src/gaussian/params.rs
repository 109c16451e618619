use std::f64::consts::TAU;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Oscillator frequencies, coherent coupling `J` and energy decay rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    omega1: f64,
    omega2: f64,
    coupling: f64,
    gamma1: f64,
    gamma2: f64,
}

impl SystemParams {
    pub fn new(omega1: f64, omega2: f64, coupling: f64, gamma1: f64, gamma2: f64) -> Result<Self> {
        positive("omega1", omega1)?;
        positive("omega2", omega2)?;
        non_negative("J", coupling)?;
        positive("gamma1", gamma1)?;
        positive("gamma2", gamma2)?;
        Ok(Self {
            omega1,
            omega2,
            coupling,
            gamma1,
            gamma2,
        })
    }

    /// Equal frequencies and equal decay rates.
    pub fn resonant(omega: f64, coupling: f64, gamma: f64) -> Result<Self> {
        Self::new(omega, omega, coupling, gamma, gamma)
    }

    pub fn omega1(&self) -> f64 {
        self.omega1
    }

    pub fn omega2(&self) -> f64 {
        self.omega2
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    pub fn gamma1(&self) -> f64 {
        self.gamma1
    }

    pub fn gamma2(&self) -> f64 {
        self.gamma2
    }

    /// `omega1 - omega2`.
    pub fn detuning(&self) -> f64 {
        self.omega1 - self.omega2
    }

    pub fn is_resonant(&self) -> bool {
        self.omega1 == self.omega2
    }

    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.omega1, self.omega2, coupling, self.gamma1, self.gamma2)
    }
}

/// Reservoir state: thermal occupation, squeezing strength and squeezing phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathSpec {
    nbar: f64,
    r: f64,
    phi: f64,
}

impl BathSpec {
    /// `phi` is wrapped into `[0, 2π)`.
    pub fn new(nbar: f64, r: f64, phi: f64) -> Result<Self> {
        non_negative("nbar", nbar)?;
        non_negative("r", r)?;
        if !phi.is_finite() {
            return Err(invalid("phi", "must be finite"));
        }
        let wrapped = phi.rem_euclid(TAU);
        // rem_euclid can round up to exactly TAU for tiny negative inputs
        let phi = if wrapped >= TAU { 0.0 } else { wrapped };
        Ok(Self { nbar, r, phi })
    }

    pub fn vacuum() -> Self {
        Self {
            nbar: 0.0,
            r: 0.0,
            phi: 0.0,
        }
    }

    pub fn thermal(nbar: f64) -> Result<Self> {
        Self::new(nbar, 0.0, 0.0)
    }

    pub fn nbar(&self) -> f64 {
        self.nbar
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn derive(&self) -> DerivedBath {
        derive_bath_params(self)
    }
}

/// Effective population `N` and anomalous correlation `M` of a squeezed thermal bath.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedBath {
    pub n: f64,
    pub m: Complex<f64>,
}

impl DerivedBath {
    pub const VACUUM: DerivedBath = DerivedBath {
        n: 0.0,
        m: Complex { re: 0.0, im: 0.0 },
    };

    /// Raw `(N, M)` without any physicality check; see [`DerivedBath::check_physical`].
    pub fn raw(n: f64, m: Complex<f64>) -> Self {
        Self { n, m }
    }

    /// `N(N+1) - |M|^2`, non-negative for a physical squeezed thermal state.
    pub fn physicality_margin(&self) -> f64 {
        self.n * (self.n + 1.0) - self.m.norm_sqr()
    }

    pub fn check_physical(&self) -> Result<()> {
        let scale = 1.0 + self.n * (self.n + 1.0);
        if self.n < 0.0 || !self.n.is_finite() {
            return Err(Error::UnphysicalBath(format!("N = {} must be >= 0", self.n)));
        }
        if !self.m.re.is_finite() || !self.m.im.is_finite() {
            return Err(Error::UnphysicalBath("M must be finite".into()));
        }
        if self.physicality_margin() < -1e-12 * scale {
            return Err(Error::UnphysicalBath(format!(
                "|M| = {} exceeds sqrt(N(N+1)) = {}",
                self.m.norm(),
                (self.n * (self.n + 1.0)).sqrt()
            )));
        }
        Ok(())
    }
}

/// `N = nbar cosh(2r) + sinh^2(r)`, `M = -(2 nbar + 1) sinh(2r) e^{2 i phi} / 2`.
pub fn derive_bath_params(spec: &BathSpec) -> DerivedBath {
    let BathSpec { nbar, r, phi } = *spec;
    let n = nbar * (2.0 * r).cosh() + r.sinh().powi(2);
    let amplitude = -0.5 * (2.0 * nbar + 1.0) * (2.0 * r).sinh();
    let m = Complex::from_polar(1.0, 2.0 * phi) * amplitude;
    DerivedBath { n, m }
}

fn positive(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a finite number > 0 (got {value})")))
    }
}

fn non_negative(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(invalid(field, format!("must be a finite number >= 0 (got {value})")))
    }
}
