//! Squeezing phase fixed in the laboratory frame.
//!
//! When the reservoir squeezing is not phase locked to the oscillators, the
//! anomalous correlation seen in the frame co-rotating at `ω` is
//! `M(t) = M e^{+2iωt}`, and the covariance matrix relaxes to a state that is
//! periodic with period `π/ω`. Two equivalent descriptions are provided:
//!
//! * [`Representation::RotatingWithTimeDependentM`]: constant drift, periodic diffusion.
//! * [`Representation::LabQuadratures`]: lab quadratures, drift with the free
//!   rotation at `ω` on each mode, constant diffusion.
//!
//! They are related by the local rotation `(x + ip)_rot = (x + ip)_lab e^{iωt}`,
//! so entanglement measures coincide at every instant.

use std::f64::consts::PI;

use nalgebra::{Complex, Matrix4};
use serde::{Serialize, Serializer};

use crate::analytic::{thermal_occupation, CriticalTemperature};
use crate::error::{invalid, Error, Result};
use crate::gaussian::{
    block_diag, build_drift_rotating, derive_bath_params, diffusion_block, log_negativity,
    max_abs, rotation_generator, symmetrize, BathSpec, CovarianceMatrix, DerivedBath,
    SystemParams,
};
use crate::numeric::bisect_predicate;

/// Coarsest allowed integration step, as a fraction of the period.
pub const MIN_STEPS_PER_PERIOD: usize = 200;

pub const MIN_SAMPLES_PER_PERIOD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Representation {
    #[serde(rename = "rotating-m")]
    RotatingWithTimeDependentM,
    #[serde(rename = "lab-quadratures")]
    LabQuadratures,
}

impl Representation {
    pub fn name(&self) -> &'static str {
        match self {
            Self::RotatingWithTimeDependentM => "rotating-m",
            Self::LabQuadratures => "lab-quadratures",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rotating-m" => Some(Self::RotatingWithTimeDependentM),
            "lab-quadratures" => Some(Self::LabQuadratures),
            _ => None,
        }
    }
}

/// Scalar summary of the periodically modulated entanglement used for `T_c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Mean,
    Min,
    Max,
}

impl Criterion {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Mean => "mean",
            Self::Min => "min",
            Self::Max => "max",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "mean" => Some(Self::Mean),
            "min" => Some(Self::Min),
            "max" => Some(Self::Max),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabFrameProblem {
    sys: SystemParams,
    baths: [BathSpec; 2],
    representation: Representation,
}

impl LabFrameProblem {
    pub fn new(
        sys: SystemParams,
        bath1: BathSpec,
        bath2: BathSpec,
        representation: Representation,
    ) -> Result<Self> {
        if !sys.is_resonant() {
            return Err(Error::NonResonant {
                omega1: sys.omega1(),
                omega2: sys.omega2(),
            });
        }
        Ok(Self {
            sys,
            baths: [bath1, bath2],
            representation,
        })
    }

    pub fn sys(&self) -> &SystemParams {
        &self.sys
    }

    pub fn baths(&self) -> &[BathSpec; 2] {
        &self.baths
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn omega(&self) -> f64 {
        self.sys.omega1()
    }

    /// `π/ω`: the anomalous terms oscillate at `2ω`.
    pub fn period(&self) -> f64 {
        PI / self.omega()
    }

    pub fn with_representation(&self, representation: Representation) -> Self {
        Self {
            representation,
            ..*self
        }
    }

    fn generators(&self) -> Generators {
        let derived = [derive_bath_params(&self.baths[0]), derive_bath_params(&self.baths[1])];
        let mut drift = build_drift_rotating(&self.sys);
        if self.representation == Representation::LabQuadratures {
            let free = rotation_generator(self.omega());
            for k in 0..2 {
                let mut block = drift.fixed_view_mut::<2, 2>(2 * k, 2 * k);
                block += free;
            }
        }
        Generators {
            drift,
            gammas: [self.sys.gamma1(), self.sys.gamma2()],
            baths: derived,
            omega: self.omega(),
            representation: self.representation,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Generators {
    drift: Matrix4<f64>,
    gammas: [f64; 2],
    baths: [DerivedBath; 2],
    omega: f64,
    representation: Representation,
}

impl Generators {
    fn diffusion(&self, t: f64) -> Matrix4<f64> {
        let phase = match self.representation {
            Representation::RotatingWithTimeDependentM => {
                Complex::from_polar(1.0, 2.0 * self.omega * t)
            }
            Representation::LabQuadratures => Complex::new(1.0, 0.0),
        };
        let block = |k: usize| {
            let bath = DerivedBath::raw(self.baths[k].n, self.baths[k].m * phase);
            diffusion_block(self.gammas[k], &bath)
        };
        block_diag(&block(0), &block(1))
    }

    fn rhs(&self, t: f64, v: &Matrix4<f64>) -> Matrix4<f64> {
        let av = self.drift * v;
        av + av.transpose() + self.diffusion(t)
    }

    fn rk4_step(&self, t: f64, h: f64, v: &Matrix4<f64>) -> Matrix4<f64> {
        let k1 = self.rhs(t, v);
        let k2 = self.rhs(t + 0.5 * h, &(v + k1 * (0.5 * h)));
        let k3 = self.rhs(t + 0.5 * h, &(v + k2 * (0.5 * h)));
        let k4 = self.rhs(t + h, &(v + k3 * h));
        symmetrize(&(v + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)))
    }
}

/// Drift `A(t)` and diffusion `D(t)` of `V̇ = A V + V A^T + D` at time `t`.
pub fn build_time_dependent_generators(
    p: &LabFrameProblem,
    t: f64,
) -> (Matrix4<f64>, Matrix4<f64>) {
    let g = p.generators();
    (g.drift, g.diffusion(t))
}

/// Fixed-step RK4 integration of the covariance equation from `t0` to `t1`.
///
/// The step actually used is `(t1 - t0) / ceil((t1 - t0) / dt)`, never larger than `dt`.
pub fn propagate_covariance(
    p: &LabFrameProblem,
    v0: &CovarianceMatrix,
    t0: f64,
    t1: f64,
    dt: f64,
) -> Result<CovarianceMatrix> {
    let max_dt = p.period() / MIN_STEPS_PER_PERIOD as f64;
    if !(dt > 0.0) || dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, max_dt });
    }
    if !(t1 >= t0) {
        return Err(invalid("t1", "must not precede t0"));
    }
    let span = t1 - t0;
    let steps = ((span / dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let h = span / steps as f64;
    let g = p.generators();
    let mut v = *v0.matrix();
    for i in 0..steps {
        v = g.rk4_step(t0 + h * i as f64, h, &v);
    }
    CovarianceMatrix::new(v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FloquetSettings {
    /// RK4 steps per period `π/ω`; at least [`MIN_STEPS_PER_PERIOD`].
    pub steps_per_period: usize,
    /// Must divide `steps_per_period`; at least [`MIN_SAMPLES_PER_PERIOD`].
    pub samples_per_period: usize,
    /// Stroboscopic convergence threshold on `max |V(t + T) - V(t)|`.
    pub tolerance: f64,
    pub max_periods: usize,
}

impl Default for FloquetSettings {
    fn default() -> Self {
        Self {
            steps_per_period: 256,
            samples_per_period: 64,
            tolerance: 1e-9,
            max_periods: 10_000,
        }
    }
}

impl FloquetSettings {
    pub fn validate(&self) -> Result<()> {
        if self.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(invalid(
                "lab.steps_per_period",
                format!("must be at least {MIN_STEPS_PER_PERIOD}"),
            ));
        }
        if self.samples_per_period < MIN_SAMPLES_PER_PERIOD
            || !self.steps_per_period.is_multiple_of(self.samples_per_period)
        {
            return Err(invalid(
                "lab.samples_per_period",
                format!("must be >= {MIN_SAMPLES_PER_PERIOD} and divide steps_per_period"),
            ));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("lab.tolerance", "must be > 0"));
        }
        if self.max_periods == 0 {
            return Err(invalid("lab.max_periods", "must be >= 1"));
        }
        Ok(())
    }
}

/// One period of the asymptotic state with entanglement statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodicSteadyState {
    pub period: f64,
    pub representation: Representation,
    /// `(t mod period, V(t))`, starting at phase 0.
    #[serde(serialize_with = "serialize_samples")]
    pub samples: Vec<(f64, CovarianceMatrix)>,
    pub log_negativity: Vec<f64>,
    pub nu_minus: Vec<f64>,
    pub en_mean: f64,
    pub en_min: f64,
    pub en_max: f64,
    /// `max |V(T) - V(0)|` over the sampled period.
    pub stroboscopic_residual: f64,
    /// Periods integrated before the sampled one.
    pub periods: usize,
}

impl PeriodicSteadyState {
    pub fn statistic(&self, criterion: Criterion) -> f64 {
        match criterion {
            Criterion::Mean => self.en_mean,
            Criterion::Min => self.en_min,
            Criterion::Max => self.en_max,
        }
    }

    pub fn physicality_margin(&self) -> f64 {
        self.samples
            .iter()
            .map(|(_, v)| v.physicality_margin())
            .fold(f64::INFINITY, f64::min)
    }
}

fn serialize_samples<S: Serializer>(
    samples: &[(f64, CovarianceMatrix)],
    serializer: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    #[derive(Serialize)]
    struct Sample {
        phase: f64,
        covariance: [f64; 16],
    }
    let mut seq = serializer.serialize_seq(Some(samples.len()))?;
    for (phase, v) in samples {
        seq.serialize_element(&Sample {
            phase: *phase,
            covariance: v.to_row_major(),
        })?;
    }
    seq.end()
}

pub fn find_periodic_steady_state(
    p: &LabFrameProblem,
    settings: &FloquetSettings,
) -> Result<PeriodicSteadyState> {
    find_periodic_steady_state_from(p, &CovarianceMatrix::vacuum(), settings)
}

/// Relaxes from `v0` one period at a time until the stroboscopic map moves
/// `V` by at most `settings.tolerance`, then samples one further period.
pub fn find_periodic_steady_state_from(
    p: &LabFrameProblem,
    v0: &CovarianceMatrix,
    settings: &FloquetSettings,
) -> Result<PeriodicSteadyState> {
    settings.validate()?;
    let g = p.generators();
    let period = p.period();
    let n = settings.steps_per_period;
    let h = period / n as f64;
    let one_period = |v: &Matrix4<f64>| {
        (0..n).fold(*v, |acc, i| g.rk4_step(h * i as f64, h, &acc))
    };

    let mut v = *v0.matrix();
    let mut residual = f64::INFINITY;
    let mut periods = 0;
    while periods < settings.max_periods {
        let next = one_period(&v);
        residual = max_abs(&(next - v));
        v = next;
        periods += 1;
        if residual <= settings.tolerance {
            break;
        }
    }
    if residual > settings.tolerance {
        return Err(Error::NoConvergence {
            periods: settings.max_periods,
            residual,
        });
    }

    let stride = n / settings.samples_per_period;
    let start = v;
    let mut samples = Vec::with_capacity(settings.samples_per_period);
    for i in 0..n {
        if i % stride == 0 {
            samples.push((h * i as f64, CovarianceMatrix::new(v)?));
        }
        v = g.rk4_step(h * i as f64, h, &v);
    }
    let stroboscopic_residual = max_abs(&(v - start));

    let mut en = Vec::with_capacity(samples.len());
    let mut nu_minus = Vec::with_capacity(samples.len());
    for (_, sample) in &samples {
        let e = log_negativity(sample)?;
        en.push(e.log_negativity);
        nu_minus.push(e.nu_minus);
    }
    let en_mean = crate::numeric::pairwise_sum(&en) / en.len() as f64;
    let en_min = en.iter().copied().fold(f64::INFINITY, f64::min);
    let en_max = en.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(PeriodicSteadyState {
        period,
        representation: p.representation,
        samples,
        log_negativity: en,
        nu_minus,
        en_mean,
        en_min,
        en_max,
        stroboscopic_residual,
        periods,
    })
}

/// Problem at temperature `T`: both baths thermal at `T` (occupation at `ω`),
/// coupling `J` and common squeezing `r`, phases taken from `template`.
pub fn problem_at(
    template: &LabFrameProblem,
    coupling: f64,
    r: f64,
    temperature: f64,
) -> Result<LabFrameProblem> {
    let nbar = thermal_occupation(template.omega(), temperature);
    let [b1, b2] = template.baths;
    LabFrameProblem::new(
        template.sys.with_coupling(coupling)?,
        BathSpec::new(nbar, r, b1.phi())?,
        BathSpec::new(nbar, r, b2.phi())?,
        template.representation,
    )
}

/// Critical temperature of the lab-frame steady state under `criterion`,
/// by bracketing and bisection in `T` to tolerance `eps`.
pub fn tc_labframe(
    template: &LabFrameProblem,
    coupling: f64,
    r: f64,
    criterion: Criterion,
    eps: f64,
    settings: &FloquetSettings,
) -> Result<CriticalTemperature> {
    if !(eps > 0.0) {
        return Err(invalid("tc.eps", "must be > 0"));
    }
    let statistic = |t: f64| -> Result<f64> {
        let p = problem_at(template, coupling, r, t)?;
        Ok(find_periodic_steady_state(&p, settings)?.statistic(criterion))
    };
    let at_zero = statistic(0.0)?;
    if !(at_zero > 0.0) {
        return Ok(CriticalTemperature::NoEntanglement);
    }

    let omega = template.omega();
    let mut previous = at_zero;
    let mut lo = 0.0;
    let mut hi = 0.05 * omega;
    loop {
        let value = statistic(hi)?;
        if value > previous + 1e-12 {
            return Err(Error::NonMonotone { temperature: hi });
        }
        if !(value > 0.0) {
            break;
        }
        previous = value;
        lo = hi;
        hi *= 2.0;
        if hi > 1e4 * omega {
            return Err(Error::Numerical("lab-frame entanglement persists at very high temperature"));
        }
    }

    let mut failure = None;
    let (lo, hi) = bisect_predicate(lo, hi, eps, |t| match statistic(t) {
        Ok(value) => value > 0.0,
        Err(e) => {
            failure.get_or_insert(e);
            false
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(CriticalTemperature::Finite(0.5 * (lo + hi)))
}
