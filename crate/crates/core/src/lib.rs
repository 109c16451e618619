//! Steady-state entanglement of two coupled harmonic oscillators, each damped
//! by its own squeezed thermal reservoir.
//!
//! Conventions used throughout: hbar = 1, k_B = 1, frequencies and
//! temperatures in units of the oscillator frequency, quadratures
//! `x = (a + a†)/√2`, `p = (a - a†)/(i√2)` ordered as `(x1, p1, x2, p2)`,
//! vacuum variance 1/2. A two-mode Gaussian state is entangled iff the
//! smallest symplectic eigenvalue of its partial transpose is below 1/2.
//!
//! * [`gaussian`]: drift/diffusion construction, Lyapunov steady state,
//!   symplectic spectra and logarithmic negativity.
//! * [`analytic`]: closed forms for the symmetric resonant case.
//! * [`labframe`]: time-periodic steady state when the squeezing phase is
//!   fixed in the laboratory frame.
//! * [`langevin`]: Monte Carlo sampling of the Langevin equations, used as an
//!   independent check on the Lyapunov solution.
//! * [`cli`]: configuration parsing, sweeps and the `sqzent` command line.

// `!(x > 0.0)` is the NaN-rejecting form used by every validator
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
mod error;
pub mod gaussian;
pub mod labframe;
pub mod langevin;
pub mod numeric;

pub use error::{Error, Result};
/// Matrix and complex types appearing in the public API.
pub use nalgebra::{Complex, Matrix4};
pub use gaussian::{
    build_diffusion_rotating, build_drift_rotating, derive_bath_params, log_negativity,
    partial_transpose, solve_lyapunov, steady_state, symplectic_eigenvalues, BathSpec,
    CovarianceMatrix, DerivedBath, EntanglementResult, SymplecticForm, SystemParams,
};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
