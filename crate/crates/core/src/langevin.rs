//! Monte Carlo check of steady-state covariances via the Langevin equations.
//!
//! The quadrature equations `dX = A X dt + dW`, with `dW` Gaussian of covariance
//! `D dt`, are integrated by Euler–Maruyama as a classical SDE. Its second
//! moments obey exactly the same `V̇ = AV + VA^T + D` as the symmetrized
//! quantum covariance, so for Gaussian dynamics the ensemble covariance is an
//! unbiased (up to the O(dt) discretization bias) estimate of the Lyapunov
//! solution. Nothing beyond second moments is claimed.
//!
//! Trajectory `i` draws its normals from `ChaCha8Rng::seed_from_u64(seed)`
//! switched to stream `i`, so results are independent of thread scheduling.

use nalgebra::{Matrix4, Vector4};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::gaussian::{build_diffusion_rotating, build_drift_rotating, CovarianceMatrix, DerivedBath, SystemParams};
use crate::numeric::pairwise_sum;

pub const RNG_ALGORITHM: &str =
    "ChaCha8 (rand_chacha): seed_from_u64(seed), stream = trajectory index; ziggurat normals (rand_distr::StandardNormal)";

/// Pivots below this fraction of the largest diagonal entry are treated as zero.
const PIVOT_TOL: f64 = 1e-12;

/// Gaussian increments with per-step covariance `D dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    diffusion: Matrix4<f64>,
    factor: Matrix4<f64>,
    seed: u64,
    dt: f64,
}

impl NoiseModel {
    pub fn new(
        sys: &SystemParams,
        bath1: &DerivedBath,
        bath2: &DerivedBath,
        seed: u64,
        dt: f64,
    ) -> Result<Self> {
        bath1.check_physical()?;
        bath2.check_physical()?;
        Self::from_diffusion(build_diffusion_rotating(sys, bath1, bath2), seed, dt)
    }

    /// Any symmetric positive-semidefinite per-unit-time covariance.
    pub fn from_diffusion(diffusion: Matrix4<f64>, seed: u64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("oracle.dt", "must be > 0"));
        }
        let factor = psd_factor(&diffusion)?;
        Ok(Self {
            diffusion,
            factor,
            seed,
            dt,
        })
    }

    /// Deterministic limit: no noise at all.
    pub fn noiseless(seed: u64, dt: f64) -> Result<Self> {
        Self::from_diffusion(Matrix4::zeros(), seed, dt)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn diffusion(&self) -> &Matrix4<f64> {
        &self.diffusion
    }

    /// Target covariance of one increment.
    pub fn step_covariance(&self) -> Matrix4<f64> {
        self.diffusion * self.dt
    }

    /// `G` with `G G^T = D`.
    pub fn factor(&self) -> &Matrix4<f64> {
        &self.factor
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }

    /// Increment over one step of length `dt`, built from `substeps` independent
    /// sub-increments of length `dt / substeps`. A run with step `dt` and
    /// `substeps = 2` consumes the same normals, in the same Brownian path, as a
    /// run with step `dt / 2`.
    fn increment(&self, rng: &mut ChaCha8Rng, substeps: usize) -> Vector4<f64> {
        let mut z = Vector4::zeros();
        for _ in 0..substeps {
            for k in 0..4 {
                z[k] += Distribution::<f64>::sample(&StandardNormal, rng);
            }
        }
        self.factor * z * (self.dt / substeps as f64).sqrt()
    }
}

/// Pivoted Cholesky: returns `G` with `G G^T = m` for symmetric positive-semidefinite `m`.
///
/// Pivoting rule: at each stage the largest remaining diagonal entry is
/// eliminated; once it falls below `PIVOT_TOL` times the largest original
/// diagonal, the remainder must vanish to the same tolerance and is dropped.
/// This handles rank-deficient covariances such as pure squeezed vacuum.
fn psd_factor(m: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    let scale = (0..4).map(|i| m[(i, i)].abs()).fold(0.0, f64::max);
    let tol = PIVOT_TOL * scale.max(f64::MIN_POSITIVE);
    if !m.iter().all(|x| x.is_finite()) {
        return Err(Error::UnphysicalBath("non-finite diffusion matrix".into()));
    }
    if (m - m.transpose()).iter().any(|x| x.abs() > tol) {
        return Err(Error::UnphysicalBath("diffusion matrix is not symmetric".into()));
    }
    let mut work = *m;
    let mut g = Matrix4::zeros();
    let mut remaining: Vec<usize> = (0..4).collect();
    for col in 0..4 {
        let (pos, &pivot) = remaining
            .iter()
            .enumerate()
            .max_by(|a, b| work[(*a.1, *a.1)].total_cmp(&work[(*b.1, *b.1)]))
            .expect("non-empty");
        let d = work[(pivot, pivot)];
        if d <= tol {
            let rest_max = remaining
                .iter()
                .flat_map(|&i| remaining.iter().map(move |&j| (i, j)))
                .map(|(i, j)| work[(i, j)].abs())
                .fold(0.0, f64::max);
            if d < -tol || rest_max > tol {
                return Err(Error::UnphysicalBath(format!(
                    "per-step noise covariance is not positive semidefinite (pivot {d:e})"
                )));
            }
            break;
        }
        remaining.swap_remove(pos);
        let root = d.sqrt();
        g[(pivot, col)] = root;
        for &i in &remaining {
            g[(i, col)] = work[(i, pivot)] / root;
        }
        for &i in &remaining {
            for &j in &remaining {
                work[(i, j)] -= g[(i, col)] * g[(j, col)];
            }
        }
    }
    Ok(g)
}

/// `n` consecutive increments from stream 0 of the model's generator.
pub fn generate_noise(model: &NoiseModel, n: usize) -> Vec<[f64; 4]> {
    let mut rng = model.rng(0);
    (0..n)
        .map(|_| {
            let dw = model.increment(&mut rng, 1);
            [dw[0], dw[1], dw[2], dw[3]]
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleSettings {
    pub n_traj: usize,
    pub t_end: f64,
    /// Sub-increments summed into each step's noise (1 for plain Euler–Maruyama).
    pub substeps: usize,
    pub initial_mean: [f64; 4],
}

impl EnsembleSettings {
    pub fn new(n_traj: usize, t_end: f64) -> Self {
        Self {
            n_traj,
            t_end,
            substeps: 1,
            initial_mean: [0.0; 4],
        }
    }
}

/// Sample mean and covariance over trajectories at `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleEstimate {
    #[serde(serialize_with = "serialize_matrix")]
    pub v_hat: Matrix4<f64>,
    #[serde(serialize_with = "serialize_matrix")]
    pub stderr: Matrix4<f64>,
    pub mean: [f64; 4],
    pub n_traj: usize,
    pub steps: usize,
    pub dt: f64,
    pub t_end: f64,
}

/// Largest Euler–Maruyama step allowed: `0.01 / max(γ1, γ2, J, |ω1 - ω2|)`.
pub fn max_dt(sys: &SystemParams) -> f64 {
    0.01 / rate_scale(sys)
}

/// Default step, below [`max_dt`] and small enough that the O(dt) bias of the
/// stationary Euler–Maruyama covariance stays under about half a standard
/// error at 1e5 trajectories.
pub fn default_dt(sys: &SystemParams) -> f64 {
    let g_min = sys.gamma1().min(sys.gamma2());
    let g_max = sys.gamma1().max(sys.gamma2());
    let j = sys.coupling();
    let delta = sys.detuning();
    let bias_limited = 2e-3 * g_min / (0.25 * g_max * g_max + j * j + delta * delta);
    max_dt(sys).min(bias_limited)
}

/// Relaxation margin `10 / min(γ1, γ2)`.
pub fn min_t_end(sys: &SystemParams) -> f64 {
    10.0 / sys.gamma1().min(sys.gamma2())
}

fn rate_scale(sys: &SystemParams) -> f64 {
    sys.gamma1()
        .max(sys.gamma2())
        .max(sys.coupling())
        .max(sys.detuning().abs())
}

pub fn run_ensemble(
    sys: &SystemParams,
    noise: &NoiseModel,
    n_traj: usize,
    t_end: f64,
) -> Result<EnsembleEstimate> {
    run_ensemble_with(sys, noise, &EnsembleSettings::new(n_traj, t_end))
}

pub fn run_ensemble_with(
    sys: &SystemParams,
    noise: &NoiseModel,
    settings: &EnsembleSettings,
) -> Result<EnsembleEstimate> {
    if settings.n_traj < 2 {
        return Err(invalid("oracle.n_traj", "need at least 2 trajectories"));
    }
    if settings.substeps == 0 {
        return Err(invalid("substeps", "must be >= 1"));
    }
    let t_min = min_t_end(sys);
    if !(settings.t_end >= t_min * (1.0 - 1e-12)) {
        return Err(invalid(
            "oracle.t_end",
            format!("must be at least 10/min(gamma) = {t_min}"),
        ));
    }
    let dt_max = max_dt(sys);
    if noise.dt > dt_max * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge {
            dt: noise.dt,
            max_dt: dt_max,
        });
    }

    let a = build_drift_rotating(sys);
    let steps = (settings.t_end / noise.dt).round().max(1.0) as usize;
    let propagator = Matrix4::identity() + a * noise.dt;
    let x0 = Vector4::from(settings.initial_mean);
    let finals: Vec<Vector4<f64>> = (0..settings.n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = noise.rng(i as u64);
            let mut x = x0;
            for _ in 0..steps {
                x = propagator * x + noise.increment(&mut rng, settings.substeps);
            }
            x
        })
        .collect();

    let n = finals.len() as f64;
    let column = |k: usize| finals.iter().map(|x| x[k]).collect::<Vec<f64>>();
    let mean: [f64; 4] = std::array::from_fn(|k| pairwise_sum(&column(k)) / n);
    let mut v_hat = Matrix4::zeros();
    let mut stderr = Matrix4::zeros();
    for i in 0..4 {
        for j in i..4 {
            let products: Vec<f64> = finals
                .iter()
                .map(|x| (x[i] - mean[i]) * (x[j] - mean[j]))
                .collect();
            let cov = pairwise_sum(&products) / (n - 1.0);
            let spread: Vec<f64> = products.iter().map(|z| (z - cov) * (z - cov)).collect();
            let se = (pairwise_sum(&spread) / (n - 1.0) / n).sqrt();
            v_hat[(i, j)] = cov;
            v_hat[(j, i)] = cov;
            stderr[(i, j)] = se;
            stderr[(j, i)] = se;
        }
    }
    Ok(EnsembleEstimate {
        v_hat,
        stderr,
        mean,
        n_traj: settings.n_traj,
        steps,
        dt: noise.dt,
        t_end: steps as f64 * noise.dt,
    })
}

/// Elementwise comparison of an ensemble estimate with a reference covariance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleComparison {
    #[serde(serialize_with = "serialize_matrix")]
    pub z_scores: Matrix4<f64>,
    pub within: [[bool; 4]; 4],
    pub fraction_within: f64,
    pub sigma: f64,
    pub required_fraction: f64,
    pub pass: bool,
}

/// Entry `(i, j)` agrees when `|V̂ - V| <= sigma * stderr`; the verdict passes
/// when at least `required_fraction` of the 16 entries agree.
pub fn compare(
    estimate: &EnsembleEstimate,
    reference: &CovarianceMatrix,
    sigma: f64,
    required_fraction: f64,
) -> OracleComparison {
    let mut z_scores = Matrix4::zeros();
    let mut within = [[false; 4]; 4];
    let mut count = 0;
    for i in 0..4 {
        for j in 0..4 {
            let diff = estimate.v_hat[(i, j)] - reference[(i, j)];
            let se = estimate.stderr[(i, j)];
            let z = if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY.copysign(diff)
            };
            z_scores[(i, j)] = z;
            within[i][j] = z.abs() <= sigma;
            count += usize::from(within[i][j]);
        }
    }
    let fraction_within = count as f64 / 16.0;
    OracleComparison {
        z_scores,
        within,
        fraction_within,
        sigma,
        required_fraction,
        pass: fraction_within >= required_fraction,
    }
}

pub(crate) fn serialize_matrix<S: serde::Serializer>(
    m: &Matrix4<f64>,
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    let rows: [f64; 16] = std::array::from_fn(|k| m[(k / 4, k % 4)]);
    serde::Serialize::serialize(&rows, serializer)
}
