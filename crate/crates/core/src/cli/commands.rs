//! The five commands, each producing the full output document as a string.

use rayon::prelude::*;
use serde::Serialize;

use super::config::{AxisName, Frame, Point, RunConfig};
use crate::analytic::{self, CriticalTemperature};
use crate::error::{invalid, Result};
use crate::gaussian::{
    build_diffusion_rotating, build_drift_rotating, log_negativity, lyapunov_residual,
    solve_lyapunov, stability_margin, symplectic_eigenvalues, EntanglementResult, RESIDUAL_TOL,
    ROTATING_FRAME, THRESHOLD_BAND,
};
use crate::labframe::{self, find_periodic_steady_state, LabFrameProblem, PeriodicSteadyState};
use crate::langevin::{self, compare, run_ensemble, NoiseModel};

pub const UNITS_LINE: &str = "# units: omega=1, kB=1";

/// Per-entry agreement threshold and required fraction for the oracle verdict.
pub const ORACLE_SIGMA: f64 = 3.0;
pub const ORACLE_FRACTION: f64 = 0.95;

/// Relative offset from `T_c` at which the rotating-frame threshold is confirmed numerically.
const CONFIRM_OFFSET: f64 = 1e-6;

fn check_baths(point: &Point) -> Result<()> {
    for bath in point.derived() {
        bath.check_physical()?;
    }
    Ok(())
}

fn lab_problem(cfg: &RunConfig, point: &Point) -> Result<LabFrameProblem> {
    let [b1, b2] = point
        .specs()
        .ok_or_else(|| invalid("bath1.N", "raw (N, M) baths are not supported in the lab frame"))?;
    LabFrameProblem::new(point.sys, b1, b2, cfg.representation)
}

struct RotatingState {
    covariance: [f64; 16],
    entanglement: EntanglementResult,
    symplectic: [f64; 2],
    stability_margin: f64,
    physicality_margin: f64,
    residual: f64,
}

fn rotating_state(point: &Point) -> Result<RotatingState> {
    check_baths(point)?;
    let [b1, b2] = point.derived();
    let a = build_drift_rotating(&point.sys);
    let d = build_diffusion_rotating(&point.sys, &b1, &b2);
    let v = solve_lyapunov(&a, &d)?;
    Ok(RotatingState {
        covariance: v.to_row_major(),
        entanglement: log_negativity(&v)?,
        symplectic: symplectic_eigenvalues(v.matrix())?,
        stability_margin: stability_margin(&a),
        physicality_margin: v.physicality_margin(),
        residual: lyapunov_residual(&a, &v, &d),
    })
}

#[derive(Serialize)]
struct AnalyticComparison {
    applicable: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    y: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    r_function: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nu_minus: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    abs_difference: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    critical_temperature: Option<CriticalTemperature>,
}

impl AnalyticComparison {
    fn not_applicable(reason: &'static str) -> Self {
        Self {
            applicable: false,
            reason: Some(reason),
            y: None,
            r_function: None,
            nu_minus: None,
            abs_difference: None,
            critical_temperature: None,
        }
    }
}

/// Closed-form comparison when the symmetric resonant preconditions hold.
fn analytic_comparison(point: &Point, numeric_nu: f64) -> AnalyticComparison {
    let sys = &point.sys;
    if sys.omega1() != sys.omega2() {
        return AnalyticComparison::not_applicable("omega1 != omega2");
    }
    if sys.gamma1() != sys.gamma2() {
        return AnalyticComparison::not_applicable("gamma1 != gamma2");
    }
    let Some([b1, b2]) = point.specs() else {
        return AnalyticComparison::not_applicable("raw (N, M) bath");
    };
    if b1.r() != b2.r() {
        return AnalyticComparison::not_applicable("r1 != r2");
    }
    if b1.phi() != b2.phi() {
        return AnalyticComparison::not_applicable("phi1 != phi2");
    }
    if b1.nbar() != b2.nbar() {
        return AnalyticComparison::not_applicable("nbar1 != nbar2");
    }
    let y = 2.0 * b1.nbar() + 1.0;
    let big_r = analytic::r_function(sys.gamma1(), sys.coupling(), b1.r());
    let nu = 0.5 * y * big_r;
    AnalyticComparison {
        applicable: true,
        reason: None,
        y: Some(y),
        r_function: Some(big_r),
        nu_minus: Some(nu),
        abs_difference: Some((nu - numeric_nu).abs()),
        critical_temperature: Some(analytic::critical_temperature(
            sys.gamma1(),
            sys.coupling(),
            b1.r(),
            sys.omega1(),
        )),
    }
}

#[derive(Serialize)]
struct SteadyReport {
    version: &'static str,
    frame: &'static str,
    reference_frame: &'static str,
    seed: u64,
    config: String,
    covariance: [f64; 16],
    nu_minus: f64,
    log_negativity: f64,
    entangled: bool,
    symplectic_eigenvalues: [f64; 2],
    stability_margin: f64,
    physicality_margin: f64,
    lyapunov_residual: f64,
    analytic: AnalyticComparison,
}

pub fn cmd_steady(cfg: &RunConfig) -> Result<String> {
    let point = cfg.base_point()?;
    let state = rotating_state(&point)?;
    let report = SteadyReport {
        version: crate::VERSION,
        frame: Frame::Rotating.name(),
        reference_frame: ROTATING_FRAME,
        seed: cfg.seed,
        config: cfg.to_config_string(),
        covariance: state.covariance,
        nu_minus: state.entanglement.nu_minus,
        log_negativity: state.entanglement.log_negativity,
        entangled: state.entanglement.entangled,
        symplectic_eigenvalues: state.symplectic,
        stability_margin: state.stability_margin,
        physicality_margin: state.physicality_margin,
        lyapunov_residual: state.residual,
        analytic: analytic_comparison(&point, state.entanglement.nu_minus),
    };
    to_json(&report)
}

/// `{:.16e}`: 17 significant digits, exact double round trip. Negative zero prints as zero.
pub fn csv_num(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

fn csv_opt(x: Option<f64>) -> String {
    x.map(csv_num).unwrap_or_default()
}

fn tolerance_tag(cfg: &RunConfig) -> String {
    format!(
        "residual={:e};band={:e};floquet={:e};steps={};samples={};tc_eps={:e}",
        RESIDUAL_TOL,
        THRESHOLD_BAND,
        cfg.floquet.tolerance,
        cfg.floquet.steps_per_period,
        cfg.floquet.samples_per_period,
        cfg.tc_eps
    )
}

const SWEEP_HEADER: &str = "omega1,omega2,J,gamma1,gamma2,T,nbar1,r1,phi1,nbar2,r2,phi2,N1,M1_re,M1_im,N2,M2_re,M2_im,frame,nu_minus,log_negativity,entangled,en_mean,en_min,en_max,version,seed,tolerances";

struct SweepRow {
    point: Point,
    entanglement: EntanglementResult,
    lab: Option<(f64, f64, f64)>,
}

fn sweep_point(cfg: &RunConfig, point: Point) -> Result<SweepRow> {
    match cfg.frame {
        Frame::Rotating => {
            let state = rotating_state(&point)?;
            Ok(SweepRow {
                point,
                entanglement: state.entanglement,
                lab: None,
            })
        }
        Frame::Lab => {
            let pss = find_periodic_steady_state(&lab_problem(cfg, &point)?, &cfg.floquet)?;
            Ok(SweepRow {
                point,
                entanglement: EntanglementResult::from_nu_minus(pss.nu_minus[0]),
                lab: Some((pss.en_mean, pss.en_min, pss.en_max)),
            })
        }
    }
}

fn resolve_points(cfg: &RunConfig) -> Result<Vec<Point>> {
    cfg.grid.points().iter().map(|c| cfg.point(c)).collect()
}

fn first_error<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    results.into_iter().collect()
}

pub fn cmd_sweep(cfg: &RunConfig) -> Result<String> {
    if cfg.frame == Frame::Lab && cfg.omega1 != cfg.omega2 {
        return Err(crate::Error::NonResonant {
            omega1: cfg.omega1,
            omega2: cfg.omega2,
        });
    }
    let points = resolve_points(cfg)?;
    let rows = first_error(points.into_par_iter().map(|p| sweep_point(cfg, p)).collect())?;
    let tolerances = tolerance_tag(cfg);
    let mut out = format!("{UNITS_LINE}\n{SWEEP_HEADER}\n");
    for row in &rows {
        let sys = &row.point.sys;
        let mut fields = vec![
            csv_num(sys.omega1()),
            csv_num(sys.omega2()),
            csv_num(sys.coupling()),
            csv_num(sys.gamma1()),
            csv_num(sys.gamma2()),
            csv_opt(row.point.temperature),
        ];
        for bath in &row.point.baths {
            let spec = bath.spec();
            fields.push(csv_opt(spec.map(|s| s.nbar())));
            fields.push(csv_opt(spec.map(|s| s.r())));
            fields.push(csv_opt(spec.map(|s| s.phi())));
        }
        for bath in row.point.derived() {
            fields.extend([csv_num(bath.n), csv_num(bath.m.re), csv_num(bath.m.im)]);
        }
        fields.push(cfg.frame.name().into());
        fields.push(csv_num(row.entanglement.nu_minus));
        fields.push(csv_num(row.entanglement.log_negativity));
        fields.push(row.entanglement.entangled.to_string());
        fields.push(csv_opt(row.lab.map(|l| l.0)));
        fields.push(csv_opt(row.lab.map(|l| l.1)));
        fields.push(csv_opt(row.lab.map(|l| l.2)));
        fields.push(crate::VERSION.into());
        fields.push(cfg.seed.to_string());
        fields.push(tolerances.clone());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

const TC_HEADER: &str =
    "r,J,T_c,entangled,frame,criterion,confirmed,gamma,omega,phi1,phi2,version,seed,tolerances";

/// Squeezing common to both baths for the `tc` command.
fn common_r(point: &Point) -> Result<(f64, [f64; 2])> {
    let [b1, b2] = point
        .specs()
        .ok_or_else(|| invalid("bath1.N", "raw (N, M) baths are not supported by tc"))?;
    if b1.r() != b2.r() {
        return Err(invalid("bath2.r", "tc needs equal squeezing on both baths (use `r` or grid.r)"));
    }
    Ok((b1.r(), [b1.phi(), b2.phi()]))
}

/// Entangled just below `T_c` and separable just above, by the Lyapunov pipeline.
fn confirm_rotating(point: &Point, tc: CriticalTemperature) -> Result<bool> {
    let (r, [phi1, phi2]) = common_r(point)?;
    let entangled_at = |t: f64| -> Result<bool> {
        let nbar = analytic::thermal_occupation(point.sys.omega1(), t);
        let mut p = *point;
        for (k, phi) in [phi1, phi2].into_iter().enumerate() {
            p.baths[k] = super::config::ResolvedBath::Spec(crate::gaussian::BathSpec::new(nbar, r, phi)?);
        }
        Ok(rotating_state(&p)?.entanglement.entangled)
    };
    Ok(match tc {
        CriticalTemperature::Finite(t) => {
            entangled_at(t * (1.0 - CONFIRM_OFFSET))? && !entangled_at(t * (1.0 + CONFIRM_OFFSET))?
        }
        CriticalTemperature::NoEntanglement => !entangled_at(0.0)?,
    })
}

struct TcRow {
    r: f64,
    coupling: f64,
    phis: [f64; 2],
    tc: CriticalTemperature,
    confirmed: Option<bool>,
}

fn tc_point(cfg: &RunConfig, point: Point) -> Result<TcRow> {
    let (r, phis) = common_r(&point)?;
    let sys = point.sys;
    match cfg.frame {
        Frame::Rotating => {
            let tc = analytic::critical_temperature(sys.gamma1(), sys.coupling(), r, sys.omega1());
            Ok(TcRow {
                r,
                coupling: sys.coupling(),
                phis,
                tc,
                confirmed: Some(confirm_rotating(&point, tc)?),
            })
        }
        Frame::Lab => {
            let template = lab_problem(cfg, &point)?;
            let tc = labframe::tc_labframe(&template, sys.coupling(), r, cfg.criterion, cfg.tc_eps, &cfg.floquet)?;
            Ok(TcRow {
                r,
                coupling: sys.coupling(),
                phis,
                tc,
                confirmed: None,
            })
        }
    }
}

pub fn cmd_tc(cfg: &RunConfig) -> Result<String> {
    if cfg.grid.axes.iter().any(|a| !matches!(a.name, AxisName::R | AxisName::J)) {
        return Err(invalid("grid", "tc sweeps only over grid.r and grid.J"));
    }
    if cfg.omega1 != cfg.omega2 {
        return Err(crate::Error::NonResonant {
            omega1: cfg.omega1,
            omega2: cfg.omega2,
        });
    }
    if cfg.gamma1 != cfg.gamma2 {
        return Err(invalid("gamma2", "tc needs gamma1 == gamma2"));
    }
    let points = resolve_points(cfg)?;
    if cfg.frame == Frame::Rotating {
        for p in &points {
            let (_, [phi1, phi2]) = common_r(p)?;
            if phi1 != phi2 {
                return Err(invalid("bath2.phi", "the rotating-frame closed form needs phi1 == phi2"));
            }
        }
    }
    let rows = first_error(points.into_par_iter().map(|p| tc_point(cfg, p)).collect())?;
    let tolerances = tolerance_tag(cfg);
    let criterion = match cfg.frame {
        Frame::Rotating => "",
        Frame::Lab => cfg.criterion.name(),
    };
    let mut out = format!("{UNITS_LINE}\n{TC_HEADER}\n");
    for row in &rows {
        let fields = [
            csv_num(row.r),
            csv_num(row.coupling),
            csv_opt(row.tc.value()),
            row.tc.value().is_some().to_string(),
            cfg.frame.name().to_string(),
            criterion.to_string(),
            row.confirmed.map(|c| c.to_string()).unwrap_or_default(),
            csv_num(cfg.gamma1),
            csv_num(cfg.omega1),
            csv_num(row.phis[0]),
            csv_num(row.phis[1]),
            crate::VERSION.to_string(),
            cfg.seed.to_string(),
            tolerances.clone(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct LabReport<'a> {
    version: &'static str,
    frame: &'static str,
    seed: u64,
    config: String,
    criterion: &'static str,
    criterion_value: f64,
    entangled: bool,
    physicality_margin: f64,
    steady_state: &'a PeriodicSteadyState,
}

pub fn cmd_labframe(cfg: &RunConfig) -> Result<String> {
    let point = cfg.base_point()?;
    let pss = find_periodic_steady_state(&lab_problem(cfg, &point)?, &cfg.floquet)?;
    let value = pss.statistic(cfg.criterion);
    to_json(&LabReport {
        version: crate::VERSION,
        frame: Frame::Lab.name(),
        seed: cfg.seed,
        config: cfg.to_config_string(),
        criterion: cfg.criterion.name(),
        criterion_value: value,
        entangled: value > 0.0,
        physicality_margin: pss.physicality_margin(),
        steady_state: &pss,
    })
}

#[derive(Serialize)]
struct OracleReport {
    version: &'static str,
    frame: &'static str,
    rng: &'static str,
    seed: u64,
    config: String,
    n_traj: usize,
    dt: f64,
    t_end: f64,
    steps: usize,
    v_hat: [f64; 16],
    stderr: [f64; 16],
    v_lyapunov: [f64; 16],
    z_scores: [f64; 16],
    within: [bool; 16],
    fraction_within: f64,
    sigma: f64,
    required_fraction: f64,
    verdict: &'static str,
}

pub fn cmd_oracle(cfg: &RunConfig) -> Result<String> {
    if cfg.frame != Frame::Rotating {
        return Err(invalid("frame", "the Monte Carlo oracle runs in the rotating frame only"));
    }
    let point = cfg.base_point()?;
    let [b1, b2] = point.derived();
    let dt = cfg.oracle.dt.unwrap_or_else(|| langevin::default_dt(&point.sys));
    let t_end = cfg.oracle.t_end.unwrap_or_else(|| langevin::min_t_end(&point.sys));
    let noise = NoiseModel::new(&point.sys, &b1, &b2, cfg.seed, dt)?;
    let reference = solve_lyapunov(
        &build_drift_rotating(&point.sys),
        &build_diffusion_rotating(&point.sys, &b1, &b2),
    )?;
    let estimate = run_ensemble(&point.sys, &noise, cfg.oracle.n_traj, t_end)?;
    let cmp = compare(&estimate, &reference, ORACLE_SIGMA, ORACLE_FRACTION);
    let flat = |m: &nalgebra::Matrix4<f64>| -> [f64; 16] { std::array::from_fn(|k| m[(k / 4, k % 4)]) };
    to_json(&OracleReport {
        version: crate::VERSION,
        frame: Frame::Rotating.name(),
        rng: langevin::RNG_ALGORITHM,
        seed: cfg.seed,
        config: cfg.to_config_string(),
        n_traj: estimate.n_traj,
        dt: estimate.dt,
        t_end: estimate.t_end,
        steps: estimate.steps,
        v_hat: flat(&estimate.v_hat),
        stderr: flat(&estimate.stderr),
        v_lyapunov: reference.to_row_major(),
        z_scores: flat(&cmp.z_scores),
        within: std::array::from_fn(|k| cmp.within[k / 4][k % 4]),
        fraction_within: cmp.fraction_within,
        sigma: cmp.sigma,
        required_fraction: cmp.required_fraction,
        verdict: if cmp.pass { "pass" } else { "fail" },
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)
        .map_err(|_| crate::Error::Numerical("non-finite value in JSON output"))?;
    s.push('\n');
    Ok(s)
}
