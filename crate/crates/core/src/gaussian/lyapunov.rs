//! Continuous Lyapunov equation `A V + V A^T + D = 0`.
//!
//! Bartels–Stewart: reduce `A` to real Schur form `A = Q T Q^T`, solve the
//! quasi-triangular equation `T Y + Y T^T = -Q^T D Q` block by block from the
//! bottom-right corner, then rotate back with `V = Q Y Q^T`.

use nalgebra::{DMatrix, DVector, Matrix4};

use super::covariance::{max_abs, symmetrize, CovarianceMatrix, SYMMETRY_TOL};
use crate::error::{Error, Result};

/// A drift whose spectrum reaches `Re λ >= -STABILITY_TOL` has no steady state.
pub const STABILITY_TOL: f64 = 1e-12;

/// Required bound on `max |A V + V A^T + D|` for a returned solution.
pub const RESIDUAL_TOL: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;

pub fn solve_lyapunov(a: &Matrix4<f64>, d: &Matrix4<f64>) -> Result<CovarianceMatrix> {
    let asymmetry = max_abs(&(d - d.transpose()));
    if asymmetry > SYMMETRY_TOL * (1.0 + max_abs(d)) {
        return Err(Error::NotSymmetric { asymmetry });
    }
    let schur = a
        .try_schur(f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(Error::Numerical("Schur decomposition did not converge"))?;
    let (q, t) = schur.unpack();
    let blocks = diagonal_blocks(&t);

    let max_real_part = blocks
        .iter()
        .map(|&(start, size)| block_max_real_part(&t, start, size))
        .fold(f64::NEG_INFINITY, f64::max);
    if max_real_part >= -STABILITY_TOL {
        return Err(Error::NotStable { max_real_part });
    }

    let c = -(q.transpose() * d * q);
    let y = solve_quasi_triangular(&t, &c, &blocks)?;
    CovarianceMatrix::new(symmetrize(&(q * y * q.transpose())))
}

/// `max |A V + V A^T + D|`.
pub fn lyapunov_residual(a: &Matrix4<f64>, v: &CovarianceMatrix, d: &Matrix4<f64>) -> f64 {
    let v = v.matrix();
    max_abs(&(a * v + v * a.transpose() + d))
}

/// Largest real part of the spectrum of `a`.
pub fn stability_margin(a: &Matrix4<f64>) -> f64 {
    a.complex_eigenvalues()
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `(start, size)` of the 1×1 and 2×2 diagonal blocks of a quasi-triangular matrix.
fn diagonal_blocks(t: &Matrix4<f64>) -> Vec<(usize, usize)> {
    let n = t.nrows();
    let mut blocks = Vec::with_capacity(n);
    let mut i = 0;
    while i < n {
        let coupled = i + 1 < n
            && t[(i + 1, i)].abs() > f64::EPSILON * (t[(i, i)].abs() + t[(i + 1, i + 1)].abs());
        if coupled {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}

fn block_max_real_part(t: &Matrix4<f64>, start: usize, size: usize) -> f64 {
    if size == 1 {
        return t[(start, start)];
    }
    let (a, b) = (t[(start, start)], t[(start, start + 1)]);
    let (c, d) = (t[(start + 1, start)], t[(start + 1, start + 1)]);
    let half_trace = 0.5 * (a + d);
    let disc = 0.25 * (a - d) * (a - d) + b * c;
    if disc >= 0.0 {
        half_trace + disc.sqrt()
    } else {
        half_trace
    }
}

fn solve_quasi_triangular(
    t: &Matrix4<f64>,
    c: &Matrix4<f64>,
    blocks: &[(usize, usize)],
) -> Result<Matrix4<f64>> {
    let mut y = Matrix4::zeros();
    for &(rk, p) in blocks.iter().rev() {
        for &(cl, q) in blocks.iter().rev() {
            let mut rhs = DMatrix::from_fn(p, q, |i, j| c[(rk + i, cl + j)]);
            // rows of T to the right of block k
            for m in (rk + p)..4 {
                for i in 0..p {
                    for j in 0..q {
                        rhs[(i, j)] -= t[(rk + i, m)] * y[(m, cl + j)];
                    }
                }
            }
            // columns of T^T below block l
            for m in (cl + q)..4 {
                for i in 0..p {
                    for j in 0..q {
                        rhs[(i, j)] -= y[(rk + i, m)] * t[(cl + j, m)];
                    }
                }
            }
            let x = small_sylvester(t, rk, p, cl, q, &rhs)?;
            for i in 0..p {
                for j in 0..q {
                    y[(rk + i, cl + j)] = x[(i, j)];
                }
            }
        }
    }
    Ok(y)
}

/// Solves `T_kk X + X T_ll^T = F` for blocks of size at most 2×2.
fn small_sylvester(
    t: &Matrix4<f64>,
    rk: usize,
    p: usize,
    cl: usize,
    q: usize,
    rhs: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = p * q;
    // column-major vec: (I_q ⊗ T_kk + T_ll ⊗ I_p) vec X = vec F
    let mut system = DMatrix::zeros(n, n);
    for j in 0..q {
        for i in 0..p {
            let row = j * p + i;
            for i2 in 0..p {
                system[(row, j * p + i2)] += t[(rk + i, rk + i2)];
            }
            for j2 in 0..q {
                system[(row, j2 * p + i)] += t[(cl + j, cl + j2)];
            }
        }
    }
    let b = DVector::from_fn(n, |k, _| rhs[(k % p, k / p)]);
    let x = system
        .lu()
        .solve(&b)
        .ok_or(Error::Numerical("singular Sylvester block (eigenvalues sum to zero)"))?;
    Ok(DMatrix::from_fn(p, q, |i, j| x[j * p + i]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_fixed_point() {
        let (gamma, nbar) = (0.7, 1.3);
        let a = Matrix4::identity() * (-gamma / 2.0);
        let d = Matrix4::identity() * (gamma * (nbar + 0.5));
        let v = solve_lyapunov(&a, &d).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { nbar + 0.5 } else { 0.0 };
                assert_relative_eq!(v[(i, j)], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn rejects_marginal_drift() {
        let mut a = Matrix4::identity() * -0.5;
        a[(3, 3)] = 0.0;
        let err = solve_lyapunov(&a, &Matrix4::identity()).unwrap_err();
        assert!(matches!(err, Error::NotStable { .. }));
    }

    #[test]
    fn rejects_oscillating_undamped_drift() {
        let mut a = Matrix4::zeros();
        a[(0, 1)] = 1.0;
        a[(1, 0)] = -1.0;
        a[(2, 2)] = -1.0;
        a[(3, 3)] = -1.0;
        assert!(matches!(solve_lyapunov(&a, &Matrix4::identity()), Err(Error::NotStable { .. })));
    }

    #[test]
    fn rejects_asymmetric_diffusion() {
        let a = Matrix4::identity() * -1.0;
        let mut d = Matrix4::identity();
        d[(0, 2)] = 0.1;
        assert!(matches!(solve_lyapunov(&a, &d), Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn non_normal_drift_with_real_and_complex_blocks() {
        let a = Matrix4::new(
            -1.0, 2.0, 0.3, 0.0, //
            -3.0, -0.5, 0.0, 0.7, //
            0.0, 0.1, -2.0, 0.4, //
            0.2, 0.0, 0.0, -0.25,
        );
        let d = Matrix4::new(
            2.0, 0.1, 0.0, 0.3, //
            0.1, 1.0, 0.2, 0.0, //
            0.0, 0.2, 1.5, 0.1, //
            0.3, 0.0, 0.1, 0.8,
        );
        let v = solve_lyapunov(&a, &d).unwrap();
        assert!(lyapunov_residual(&a, &v, &d) < RESIDUAL_TOL);
    }
}
