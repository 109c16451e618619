//! Gaussian covariance-matrix machinery for two modes.

mod covariance;
mod entanglement;
mod lyapunov;
mod model;
mod params;

pub use covariance::{
    partial_transpose, symplectic_eigenvalues, symplectic_eigenvalues_invariants,
    CovarianceMatrix, SymplecticForm, PHYSICALITY_TOL, SYMMETRY_TOL,
};
pub use entanglement::{log_negativity, EntanglementResult, THRESHOLD_BAND};
pub use lyapunov::{lyapunov_residual, solve_lyapunov, stability_margin, RESIDUAL_TOL, STABILITY_TOL};
pub use model::{
    build_diffusion_rotating, build_drift_rotating, diffusion_block, rotation_generator,
    steady_state, ROTATING_FRAME,
};
pub use params::{derive_bath_params, BathSpec, DerivedBath, SystemParams};

pub(crate) use covariance::{max_abs, symmetrize};
pub(crate) use model::block_diag;
