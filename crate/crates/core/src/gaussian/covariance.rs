use nalgebra::{Complex, Matrix2, Matrix4, SymmetricEigen};

use crate::error::{Error, Result};

/// Tolerance on `|V - V^T|` accepted by [`CovarianceMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Slack allowed on the uncertainty principle before a state is called unphysical.
pub const PHYSICALITY_TOL: f64 = 1e-10;

/// The two-mode symplectic form `Ω = ⊕ [[0, 1], [-1, 0]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticForm;

impl SymplecticForm {
    pub fn matrix() -> Matrix4<f64> {
        let mut omega = Matrix4::zeros();
        omega[(0, 1)] = 1.0;
        omega[(1, 0)] = -1.0;
        omega[(2, 3)] = 1.0;
        omega[(3, 2)] = -1.0;
        omega
    }
}

/// Symmetrized second moments of `(x1, p1, x2, p2)`; the vacuum is `I/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceMatrix(Matrix4<f64>);

impl CovarianceMatrix {
    pub fn new(entries: Matrix4<f64>) -> Result<Self> {
        let asymmetry = max_abs(&(entries - entries.transpose()));
        if !entries.iter().all(|x| x.is_finite()) {
            return Err(Error::Numerical("covariance matrix has non-finite entries"));
        }
        if asymmetry > SYMMETRY_TOL * (1.0 + max_abs(&entries)) {
            return Err(Error::NotSymmetric { asymmetry });
        }
        Ok(Self(symmetrize(&entries)))
    }

    pub fn from_row_slice(entries: &[f64; 16]) -> Result<Self> {
        Self::new(Matrix4::from_row_slice(entries))
    }

    pub fn vacuum() -> Self {
        Self(Matrix4::identity() * 0.5)
    }

    /// Two uncorrelated thermal modes with occupation `nbar`.
    pub fn thermal(nbar: f64) -> Self {
        Self(Matrix4::identity() * (nbar + 0.5))
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Matrix4<f64> {
        self.0
    }

    pub fn to_row_major(&self) -> [f64; 16] {
        std::array::from_fn(|k| self.0[(k / 4, k % 4)])
    }

    /// Smallest eigenvalue of the Hermitian matrix `V + (i/2) Ω`.
    ///
    /// Non-negative exactly when the state obeys the uncertainty principle.
    pub fn physicality_margin(&self) -> f64 {
        let omega = SymplecticForm::matrix();
        let h = self.0.map(|x| Complex::new(x, 0.0)) + omega.map(|x| Complex::new(0.0, 0.5 * x));
        h.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self) -> bool {
        self.physicality_margin() >= -PHYSICALITY_TOL
    }

    pub fn max_abs_diff(&self, other: &CovarianceMatrix) -> f64 {
        max_abs(&(self.0 - other.0))
    }
}

impl std::ops::Index<(usize, usize)> for CovarianceMatrix {
    type Output = f64;

    fn index(&self, index: (usize, usize)) -> &f64 {
        &self.0[index]
    }
}

/// `P V P` with `P = diag(1, 1, 1, -1)`: momentum reversal on mode 2.
pub fn partial_transpose(v: &CovarianceMatrix) -> Matrix4<f64> {
    let mut out = *v.matrix();
    for k in 0..3 {
        out[(k, 3)] = -out[(k, 3)];
        out[(3, k)] = -out[(3, k)];
    }
    out
}

/// Symplectic eigenvalues `(ν1, ν2)`, `ν1 <= ν2`, of a symmetric positive-definite matrix.
///
/// Computed as the singular values of the antisymmetric matrix `V^{1/2} Ω V^{1/2}`,
/// which has the spectrum `±iν` of `ΩV`. Works for any `V`, including partial
/// transposes that are not themselves physical states.
pub fn symplectic_eigenvalues(v: &Matrix4<f64>) -> Result<[f64; 2]> {
    let v = symmetrize(v);
    let eig = SymmetricEigen::new(v);
    let min_eigenvalue = eig.eigenvalues.min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let sqrt_diag = Matrix4::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
    let root = eig.eigenvectors * sqrt_diag * eig.eigenvectors.transpose();
    let k = root * SymplecticForm::matrix() * root;
    // -K^2 = K^T K has eigenvalues ν1², ν1², ν2², ν2²
    let gram = symmetrize(&(k.transpose() * k));
    let mut squares: Vec<f64> = gram.symmetric_eigenvalues().iter().copied().collect();
    squares.sort_by(f64::total_cmp);
    let nu1 = (0.5 * (squares[0] + squares[1])).max(0.0).sqrt();
    let nu2 = (0.5 * (squares[2] + squares[3])).max(0.0).sqrt();
    Ok([nu1, nu2])
}

/// Closed-form two-mode symplectic eigenvalues from the block invariants.
///
/// With `V = [[A, C], [C^T, B]]` and `Δ = det A + det B + 2 det C`,
/// `ν±² = (Δ ± sqrt(Δ² - 4 det V)) / 2`. Applied to a partial transpose this is
/// the usual `Δ̃ = det A + det B - 2 det C` of the original matrix.
pub fn symplectic_eigenvalues_invariants(v: &Matrix4<f64>) -> Result<[f64; 2]> {
    let v = symmetrize(v);
    let min_eigenvalue = v.symmetric_eigenvalues().min();
    if !(min_eigenvalue > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let a: Matrix2<f64> = v.fixed_view::<2, 2>(0, 0).into_owned();
    let b: Matrix2<f64> = v.fixed_view::<2, 2>(2, 2).into_owned();
    let c: Matrix2<f64> = v.fixed_view::<2, 2>(0, 2).into_owned();
    let delta = a.determinant() + b.determinant() + 2.0 * c.determinant();
    let det = v.determinant();
    let disc = (delta * delta - 4.0 * det).max(0.0).sqrt();
    let plus = 0.5 * (delta + disc);
    // det V / ν+² avoids cancellation in the smaller root
    let minus = if plus > 0.0 { det / plus } else { 0.0 };
    Ok([minus.max(0.0).sqrt(), plus.sqrt()])
}

pub(crate) fn symmetrize(m: &Matrix4<f64>) -> Matrix4<f64> {
    (m + m.transpose()) * 0.5
}

pub(crate) fn max_abs(m: &Matrix4<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}
