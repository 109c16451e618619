//! Drift and diffusion of the quadrature Langevin equations.
//!
//! With `α = (x + ip)/√2`, the rotating-frame equation
//! `α̇1 = -(γ1/2) α1 - iJ α2 + √γ1 ξ1` becomes
//! `ẋ1 = -(γ1/2) x1 + J p2`, `ṗ1 = -(γ1/2) p1 - J x2` (and symmetrically for
//! mode 2). The noise `ξk` with `⟨ξ†ξ⟩ = N`, `⟨ξξ⟩ = M` contributes the
//! symmetrized quadrature covariance
//! `γ [[N + 1/2 + Re M, Im M], [Im M, N + 1/2 - Re M]]`.

use nalgebra::{Matrix2, Matrix4};

use super::covariance::CovarianceMatrix;
use super::lyapunov::solve_lyapunov;
use super::params::{DerivedBath, SystemParams};
use crate::error::Result;

/// Reference frame of [`build_drift_rotating`].
///
/// For detuned oscillators both reservoirs are taken as phase locked to the
/// same `omega1` reference.
pub const ROTATING_FRAME: &str = "co-rotating at omega1";

/// Free rotation of one mode at angular frequency `freq`: `ẋ = freq p`, `ṗ = -freq x`.
pub fn rotation_generator(freq: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, freq, -freq, 0.0)
}

/// Drift `A` with `d⟨X⟩/dt = A ⟨X⟩` in the frame co-rotating at `omega1`.
pub fn build_drift_rotating(sys: &SystemParams) -> Matrix4<f64> {
    let j = sys.coupling();
    let mut a = Matrix4::zeros();
    a[(0, 0)] = -0.5 * sys.gamma1();
    a[(1, 1)] = -0.5 * sys.gamma1();
    a[(2, 2)] = -0.5 * sys.gamma2();
    a[(3, 3)] = -0.5 * sys.gamma2();
    a[(0, 3)] = j;
    a[(1, 2)] = -j;
    a[(2, 1)] = j;
    a[(3, 0)] = -j;
    // mode 2 precesses at omega2 - omega1 relative to the frame
    let residual = rotation_generator(-sys.detuning());
    a[(2, 3)] += residual[(0, 1)];
    a[(3, 2)] += residual[(1, 0)];
    a
}

/// Per-mode noise block `γ [[N + 1/2 + Re M, Im M], [Im M, N + 1/2 - Re M]]`.
pub fn diffusion_block(gamma: f64, bath: &DerivedBath) -> Matrix2<f64> {
    let diag = bath.n + 0.5;
    Matrix2::new(
        diag + bath.m.re,
        bath.m.im,
        bath.m.im,
        diag - bath.m.re,
    ) * gamma
}

/// Block-diagonal diffusion `D = D1 ⊕ D2`.
pub fn build_diffusion_rotating(
    sys: &SystemParams,
    bath1: &DerivedBath,
    bath2: &DerivedBath,
) -> Matrix4<f64> {
    block_diag(
        &diffusion_block(sys.gamma1(), bath1),
        &diffusion_block(sys.gamma2(), bath2),
    )
}

pub(crate) fn block_diag(upper: &Matrix2<f64>, lower: &Matrix2<f64>) -> Matrix4<f64> {
    let mut d = Matrix4::zeros();
    d.fixed_view_mut::<2, 2>(0, 0).copy_from(upper);
    d.fixed_view_mut::<2, 2>(2, 2).copy_from(lower);
    d
}

/// Rotating-frame steady state: build `A` and `D`, then solve the Lyapunov equation.
pub fn steady_state(
    sys: &SystemParams,
    bath1: &DerivedBath,
    bath2: &DerivedBath,
) -> Result<CovarianceMatrix> {
    solve_lyapunov(
        &build_drift_rotating(sys),
        &build_diffusion_rotating(sys, bath1, bath2),
    )
}
