//! Flat `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dotted
//! (`bath1.r = 0.3`). Unknown and repeated keys are errors. Shorthand keys
//! (`omega`, `gamma`, `nbar`, `r`, `phi`) set the same value on both
//! oscillators or both baths and may not be mixed with the per-index form.
//! [`RunConfig::to_config_string`] writes the canonical expanded form, which
//! parses back to an identical configuration.

use std::collections::HashMap;
use std::fmt;

use nalgebra::Complex;

use crate::analytic::thermal_occupation;
use crate::error::{Error, Result};
use crate::gaussian::{BathSpec, DerivedBath, SystemParams};
use crate::labframe::{Criterion, FloquetSettings, Representation};

pub const DEFAULT_TC_EPS: f64 = 1e-4;
pub const DEFAULT_N_TRAJ: usize = 100_000;
pub const MAX_GRID_AXES: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    Steady,
    Sweep,
    Tc,
    Labframe,
    Oracle,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Steady => "steady",
            Self::Sweep => "sweep",
            Self::Tc => "tc",
            Self::Labframe => "labframe",
            Self::Oracle => "oracle",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Self::Steady, Self::Sweep, Self::Tc, Self::Labframe, Self::Oracle]
            .into_iter()
            .find(|m| m.name() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Frame {
    /// Squeezing phase locked to the oscillators.
    #[default]
    Rotating,
    /// Squeezing phase fixed in the laboratory.
    Lab,
}

impl Frame {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Rotating => "rotating",
            Self::Lab => "lab",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rotating" => Some(Self::Rotating),
            "lab" => Some(Self::Lab),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BathInput {
    /// `nbar = None` takes the thermal occupation at the configured temperature.
    Spec { nbar: Option<f64>, r: f64, phi: f64 },
    /// `(N, M)` given directly, bypassing the squeezed-thermal parametrization.
    Raw { n: f64, m_re: f64, m_im: f64 },
}

impl Default for BathInput {
    fn default() -> Self {
        Self::Spec {
            nbar: None,
            r: 0.0,
            phi: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AxisName {
    /// Common squeezing of both baths.
    R,
    R1,
    R2,
    /// Common squeezing phase of both baths.
    Phi,
    Phi1,
    Phi2,
    J,
    T,
}

impl AxisName {
    pub const ALL: [AxisName; 8] = [
        Self::R,
        Self::R1,
        Self::R2,
        Self::Phi,
        Self::Phi1,
        Self::Phi2,
        Self::J,
        Self::T,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::R => "r",
            Self::R1 => "r1",
            Self::R2 => "r2",
            Self::Phi => "phi",
            Self::Phi1 => "phi1",
            Self::Phi2 => "phi2",
            Self::J => "J",
            Self::T => "T",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    fn touches_bath(&self, index: usize) -> bool {
        match self {
            Self::R | Self::Phi | Self::T => true,
            Self::R1 | Self::Phi1 => index == 0,
            Self::R2 | Self::Phi2 => index == 1,
            Self::J => false,
        }
    }

    fn overlaps(&self, other: &AxisName) -> bool {
        use AxisName::*;
        self == other
            || matches!(
                (self, other),
                (R, R1) | (R, R2) | (R1, R) | (R2, R) | (Phi, Phi1) | (Phi, Phi2) | (Phi1, Phi) | (Phi2, Phi)
            )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AxisValues {
    /// `min:max:count`, linearly spaced with exact endpoints.
    Range { min: f64, max: f64, count: usize },
    /// `v1,v2,...` in the given order.
    List(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: AxisName,
    pub values: AxisValues,
}

impl Axis {
    pub fn points(&self) -> Vec<f64> {
        match &self.values {
            AxisValues::Range { min, max, count } => crate::numeric::linspace(*min, *max, *count),
            AxisValues::List(v) => v.clone(),
        }
    }

    fn spec_string(&self) -> String {
        match &self.values {
            AxisValues::Range { min, max, count } => {
                format!("{}:{}:{}", fmt_num(*min), fmt_num(*max), count)
            }
            AxisValues::List(v) => v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(","),
        }
    }
}

/// Up to two axes; the first varies slowest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    /// Grid points in row-major order; a single empty point for an empty grid.
    pub fn points(&self) -> Vec<Vec<(AxisName, f64)>> {
        let mut out = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.points();
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push((axis.name, v));
                        p
                    })
                })
                .collect();
        }
        out
    }

    pub fn contains(&self, name: AxisName) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub n_traj: usize,
    /// Defaults to [`crate::langevin::default_dt`].
    pub dt: Option<f64>,
    /// Defaults to [`crate::langevin::min_t_end`].
    pub t_end: Option<f64>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_traj: DEFAULT_N_TRAJ,
            dt: None,
            t_end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Option<Mode>,
    pub omega1: f64,
    pub omega2: f64,
    pub coupling: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub temperature: Option<f64>,
    pub baths: [BathInput; 2],
    pub grid: SweepGrid,
    pub frame: Frame,
    pub criterion: Criterion,
    pub representation: Representation,
    pub floquet: FloquetSettings,
    pub tc_eps: f64,
    pub oracle: OracleConfig,
    pub seed: u64,
    pub out: Option<String>,
}

impl RunConfig {
    /// Defaults for everything except `J` and `gamma`, which a config file must give.
    pub fn new(coupling: f64, gamma: f64) -> Self {
        Self {
            mode: None,
            omega1: 1.0,
            omega2: 1.0,
            coupling,
            gamma1: gamma,
            gamma2: gamma,
            temperature: None,
            baths: [BathInput::default(); 2],
            grid: SweepGrid::default(),
            frame: Frame::Rotating,
            criterion: Criterion::Mean,
            representation: Representation::LabQuadratures,
            floquet: FloquetSettings::default(),
            tc_eps: DEFAULT_TC_EPS,
            oracle: OracleConfig::default(),
            seed: 0,
            out: None,
        }
    }
}

/// A fully resolved parameter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub sys: SystemParams,
    pub baths: [ResolvedBath; 2],
    pub temperature: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ResolvedBath {
    Spec(BathSpec),
    Raw(DerivedBath),
}

impl ResolvedBath {
    pub fn derived(&self) -> DerivedBath {
        match self {
            Self::Spec(s) => s.derive(),
            Self::Raw(d) => *d,
        }
    }

    pub fn spec(&self) -> Option<BathSpec> {
        match self {
            Self::Spec(s) => Some(*s),
            Self::Raw(_) => None,
        }
    }
}

impl Point {
    pub fn derived(&self) -> [DerivedBath; 2] {
        [self.baths[0].derived(), self.baths[1].derived()]
    }

    pub fn specs(&self) -> Option<[BathSpec; 2]> {
        Some([self.baths[0].spec()?, self.baths[1].spec()?])
    }
}

impl RunConfig {
    /// The base parameters with the given grid coordinates substituted.
    pub fn point(&self, coords: &[(AxisName, f64)]) -> Result<Point> {
        let mut coupling = self.coupling;
        let mut temperature = self.temperature;
        let mut baths = self.baths;
        for &(axis, value) in coords {
            match axis {
                AxisName::J => coupling = value,
                AxisName::T => temperature = Some(value),
                _ => {
                    for (k, bath) in baths.iter_mut().enumerate() {
                        if !axis.touches_bath(k) {
                            continue;
                        }
                        if let BathInput::Spec { r, phi, .. } = bath {
                            match axis {
                                AxisName::R | AxisName::R1 | AxisName::R2 => *r = value,
                                _ => *phi = value,
                            }
                        }
                    }
                }
            }
        }
        let sys = SystemParams::new(self.omega1, self.omega2, coupling, self.gamma1, self.gamma2)?;
        if let Some(t) = temperature {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(crate::error::invalid("T", "must be >= 0"));
            }
        }
        let omegas = [self.omega1, self.omega2];
        let mut resolved = [ResolvedBath::Raw(DerivedBath::VACUUM); 2];
        for k in 0..2 {
            resolved[k] = match baths[k] {
                BathInput::Spec { nbar, r, phi } => {
                    let nbar = nbar.unwrap_or_else(|| thermal_occupation(omegas[k], temperature.unwrap_or(0.0)));
                    ResolvedBath::Spec(BathSpec::new(nbar, r, phi).map_err(|e| bath_field(e, k))?)
                }
                BathInput::Raw { n, m_re, m_im } => {
                    ResolvedBath::Raw(DerivedBath::raw(n, Complex::new(m_re, m_im)))
                }
            };
        }
        Ok(Point {
            sys,
            baths: resolved,
            temperature,
        })
    }

    pub fn base_point(&self) -> Result<Point> {
        self.point(&[])
    }

    /// Canonical text form; parses back to `self`.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        if let Some(mode) = self.mode {
            put("mode", mode.name().into());
        }
        put("omega1", fmt_num(self.omega1));
        put("omega2", fmt_num(self.omega2));
        put("J", fmt_num(self.coupling));
        put("gamma1", fmt_num(self.gamma1));
        put("gamma2", fmt_num(self.gamma2));
        if let Some(t) = self.temperature {
            put("T", fmt_num(t));
        }
        for (k, bath) in self.baths.iter().enumerate() {
            let prefix = format!("bath{}", k + 1);
            match *bath {
                BathInput::Spec { nbar, r, phi } => {
                    if let Some(nbar) = nbar {
                        put(&format!("{prefix}.nbar"), fmt_num(nbar));
                    }
                    put(&format!("{prefix}.r"), fmt_num(r));
                    put(&format!("{prefix}.phi"), fmt_num(phi));
                }
                BathInput::Raw { n, m_re, m_im } => {
                    put(&format!("{prefix}.N"), fmt_num(n));
                    put(&format!("{prefix}.M_re"), fmt_num(m_re));
                    put(&format!("{prefix}.M_im"), fmt_num(m_im));
                }
            }
        }
        put("frame", self.frame.name().into());
        put("criterion", self.criterion.name().into());
        put("lab.representation", self.representation.name().into());
        put("lab.steps_per_period", self.floquet.steps_per_period.to_string());
        put("lab.samples_per_period", self.floquet.samples_per_period.to_string());
        put("lab.tolerance", fmt_num(self.floquet.tolerance));
        put("lab.max_periods", self.floquet.max_periods.to_string());
        put("tc.eps", fmt_num(self.tc_eps));
        put("oracle.n_traj", self.oracle.n_traj.to_string());
        if let Some(dt) = self.oracle.dt {
            put("oracle.dt", fmt_num(dt));
        }
        if let Some(t) = self.oracle.t_end {
            put("oracle.t_end", fmt_num(t));
        }
        put("seed", self.seed.to_string());
        if let Some(path) = &self.out {
            put("out", path.clone());
        }
        for axis in &self.grid.axes {
            put(&format!("grid.{}", axis.name.name()), axis.spec_string());
        }
        out
    }
}

fn bath_field(e: Error, k: usize) -> Error {
    match e {
        Error::InvalidParameter { field, reason } => Error::InvalidParameter {
            field: match (k, field) {
                (0, "nbar") => "bath1.nbar",
                (0, "r") => "bath1.r",
                (0, "phi") => "bath1.phi",
                (1, "nbar") => "bath2.nbar",
                (1, "r") => "bath2.r",
                (1, "phi") => "bath2.phi",
                (_, other) => other,
            },
            reason,
        },
        other => other,
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn fmt_num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(line), Some(key)) => write!(f, "config line {line}, `{key}`: {}", self.message),
            (Some(line), None) => write!(f, "config line {line}: {}", self.message),
            (None, Some(key)) => write!(f, "config `{key}`: {}", self.message),
            (None, None) => write!(f, "config: {}", self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

/// Parses and validates a configuration.
pub fn parse(text: &str) -> std::result::Result<RunConfig, ConfigError> {
    let (cfg, lines) = parse_raw(text)?;
    let at = |field: &str, message: String| ConfigError {
        line: lines.get(field).copied(),
        key: Some(field.to_string()),
        message,
    };
    validate(&cfg).map_err(|e| match e {
        Error::InvalidParameter { field, reason } => at(field, reason),
        other => ConfigError {
            line: None,
            key: None,
            message: other.to_string(),
        },
    })?;
    Ok(cfg)
}

fn parse_raw(text: &str) -> std::result::Result<(RunConfig, HashMap<String, usize>), ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    let mut grid_order: Vec<(&str, usize)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigError {
            line: Some(line),
            key: None,
            message: format!("expected `key = value`, found `{content}`"),
        })?;
        let (key, value) = (key.trim(), value.trim());
        let err = |message: String| ConfigError {
            line: Some(line),
            key: Some(key.to_string()),
            message,
        };
        if key.is_empty() {
            return Err(err("empty key".into()));
        }
        if value.is_empty() {
            return Err(err("missing value".into()));
        }
        if !is_known_key(key) {
            return Err(err("unknown key".into()));
        }
        if let Some(prev) = entries.get(key) {
            return Err(err(format!("repeated (first set on line {})", prev.line)));
        }
        if key.starts_with("grid.") {
            grid_order.push((key, line));
        }
        entries.insert(key, Entry { line, value });
    }

    let mut p = Parser {
        entries,
        lines: HashMap::new(),
    };

    let coupling = p.required_f64("J")?;
    let (gamma1, gamma2) = p.pair_f64("gamma", "gamma1", "gamma2")?;
    let (gamma1, gamma2) = match (gamma1, gamma2) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(p.missing("gamma")),
    };
    let mut cfg = RunConfig::new(coupling, gamma1);
    cfg.gamma2 = gamma2;

    if let Some(mode) = p.take("mode") {
        cfg.mode = Some(Mode::from_name(mode.value).ok_or_else(|| {
            p.bad("mode", &mode, "expected one of steady, sweep, tc, labframe, oracle")
        })?);
    }
    let (w1, w2) = p.pair_f64("omega", "omega1", "omega2")?;
    cfg.omega1 = w1.unwrap_or(1.0);
    cfg.omega2 = w2.unwrap_or(1.0);
    cfg.temperature = p.optional_f64("T", &["bath1.nbar", "bath2.nbar", "nbar"])?;

    let (nbar1, nbar2) = p.pair_f64("nbar", "bath1.nbar", "bath2.nbar")?;
    let (r1, r2) = p.pair_f64("r", "bath1.r", "bath2.r")?;
    let (phi1, phi2) = p.pair_f64("phi", "bath1.phi", "bath2.phi")?;
    let spec = [(nbar1, r1, phi1), (nbar2, r2, phi2)];
    for k in 0..2 {
        let prefix = ["bath1", "bath2"][k];
        let raw_keys = [
            format!("{prefix}.N"),
            format!("{prefix}.M_re"),
            format!("{prefix}.M_im"),
        ];
        let n = p.optional_f64(&raw_keys[0], &[])?;
        let m_re = p.optional_f64(&raw_keys[1], &[])?;
        let m_im = p.optional_f64(&raw_keys[2], &[])?;
        let (nbar, r, phi) = spec[k];
        if n.is_none() && (m_re.is_some() || m_im.is_some()) {
            let key = if m_re.is_some() { &raw_keys[1] } else { &raw_keys[2] };
            return Err(p.error_at(key, format!("needs {prefix}.N as well")));
        }
        if let Some(n) = n {
            if nbar.is_some() || r.is_some() || phi.is_some() {
                return Err(p.error_at(
                    &raw_keys[0],
                    format!("raw (N, M) cannot be combined with nbar/r/phi for {prefix}"),
                ));
            }
            cfg.baths[k] = BathInput::Raw {
                n,
                m_re: m_re.unwrap_or(0.0),
                m_im: m_im.unwrap_or(0.0),
            };
        } else {
            cfg.baths[k] = BathInput::Spec {
                nbar,
                r: r.unwrap_or(0.0),
                phi: phi.unwrap_or(0.0),
            };
        }
    }

    if let Some(e) = p.take("frame") {
        cfg.frame = Frame::from_name(e.value).ok_or_else(|| p.bad("frame", &e, "expected rotating or lab"))?;
    }
    if let Some(e) = p.take("criterion") {
        cfg.criterion =
            Criterion::from_name(e.value).ok_or_else(|| p.bad("criterion", &e, "expected mean, min or max"))?;
    }
    if let Some(e) = p.take("lab.representation") {
        cfg.representation = Representation::from_name(e.value)
            .ok_or_else(|| p.bad("lab.representation", &e, "expected rotating-m or lab-quadratures"))?;
    }
    if let Some(v) = p.optional_int("lab.steps_per_period")? {
        cfg.floquet.steps_per_period = v;
    }
    if let Some(v) = p.optional_int("lab.samples_per_period")? {
        cfg.floquet.samples_per_period = v;
    }
    if let Some(v) = p.optional_f64("lab.tolerance", &[])? {
        cfg.floquet.tolerance = v;
    }
    if let Some(v) = p.optional_int("lab.max_periods")? {
        cfg.floquet.max_periods = v;
    }
    if let Some(v) = p.optional_f64("tc.eps", &[])? {
        cfg.tc_eps = v;
    }
    if let Some(v) = p.optional_int("oracle.n_traj")? {
        cfg.oracle.n_traj = v;
    }
    cfg.oracle.dt = p.optional_f64("oracle.dt", &[])?;
    cfg.oracle.t_end = p.optional_f64("oracle.t_end", &[])?;
    if let Some(e) = p.take("seed") {
        cfg.seed = e
            .value
            .parse::<u64>()
            .map_err(|_| p.bad("seed", &e, "expected an unsigned 64-bit integer"))?;
        p.lines.insert("seed".into(), e.line);
    }
    if let Some(e) = p.take("out") {
        cfg.out = Some(e.value.to_string());
    }

    for (key, line) in grid_order {
        let entry = p.take(key).expect("grid key recorded");
        let name = AxisName::from_name(&key["grid.".len()..]).expect("checked by is_known_key");
        let err = |message: String| ConfigError {
            line: Some(line),
            key: Some(key.to_string()),
            message,
        };
        let values = parse_axis(entry.value).map_err(err)?;
        if cfg.grid.axes.len() == MAX_GRID_AXES {
            return Err(err(format!("at most {MAX_GRID_AXES} grid axes")));
        }
        if let Some(other) = cfg.grid.axes.iter().find(|a| a.name.overlaps(&name)) {
            return Err(err(format!("overlaps grid.{}", other.name.name())));
        }
        for (k, bath) in cfg.baths.iter().enumerate() {
            if !name.touches_bath(k) {
                continue;
            }
            match bath {
                BathInput::Raw { .. } => {
                    return Err(err(format!("bath{} is given as raw (N, M)", k + 1)));
                }
                BathInput::Spec { nbar: Some(_), .. } if name == AxisName::T => {
                    return Err(err(format!("bath{}.nbar is fixed explicitly", k + 1)));
                }
                _ => {}
            }
        }
        let axis = Axis { name, values };
        let bound_ok = |x: f64| match name {
            AxisName::Phi | AxisName::Phi1 | AxisName::Phi2 => x.is_finite(),
            _ => x.is_finite() && x >= 0.0,
        };
        if let Some(bad) = axis.points().into_iter().find(|x| !bound_ok(*x)) {
            return Err(err(format!("value {bad} out of range")));
        }
        cfg.grid.axes.push(axis);
        p.lines.insert(key.to_string(), line);
    }

    debug_assert!(p.entries.is_empty(), "every known key is consumed");
    Ok((cfg, p.lines))
}

fn parse_axis(value: &str) -> std::result::Result<AxisValues, String> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| format!("`{}` is not a finite number", s.trim()))
    };
    if value.contains(':') {
        let parts: Vec<&str> = value.split(':').collect();
        if parts.len() != 3 {
            return Err("expected `min:max:count`".into());
        }
        let (min, max) = (num(parts[0])?, num(parts[1])?);
        let count = parts[2]
            .trim()
            .parse::<usize>()
            .map_err(|_| format!("`{}` is not a point count", parts[2].trim()))?;
        if count < 2 {
            return Err("a range needs count >= 2".into());
        }
        if !(max > min) {
            return Err("a range needs max > min".into());
        }
        Ok(AxisValues::Range { min, max, count })
    } else {
        let values = value.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?;
        Ok(AxisValues::List(values))
    }
}

fn is_known_key(key: &str) -> bool {
    const KEYS: &[&str] = &[
        "mode", "omega", "omega1", "omega2", "J", "gamma", "gamma1", "gamma2", "T", "nbar", "r", "phi",
        "bath1.nbar", "bath1.r", "bath1.phi", "bath1.N", "bath1.M_re", "bath1.M_im",
        "bath2.nbar", "bath2.r", "bath2.phi", "bath2.N", "bath2.M_re", "bath2.M_im",
        "frame", "criterion", "lab.representation", "lab.steps_per_period",
        "lab.samples_per_period", "lab.tolerance", "lab.max_periods", "tc.eps",
        "oracle.n_traj", "oracle.dt", "oracle.t_end", "seed", "out",
    ];
    KEYS.contains(&key)
        || key
            .strip_prefix("grid.")
            .is_some_and(|axis| AxisName::from_name(axis).is_some())
}

struct Parser<'a> {
    entries: HashMap<&'a str, Entry<'a>>,
    /// Canonical field name to the source line that set it.
    lines: HashMap<String, usize>,
}

impl<'a> Parser<'a> {
    fn take(&mut self, key: &str) -> Option<Entry<'a>> {
        self.entries.remove(key)
    }

    fn bad(&self, key: &str, e: &Entry, message: &str) -> ConfigError {
        ConfigError {
            line: Some(e.line),
            key: Some(key.to_string()),
            message: format!("{message} (found `{}`)", e.value),
        }
    }

    fn missing(&self, key: &str) -> ConfigError {
        ConfigError {
            line: None,
            key: Some(key.to_string()),
            message: "required key is missing".into(),
        }
    }

    fn error_at(&self, key: &str, message: String) -> ConfigError {
        ConfigError {
            line: self.lines.get(key).copied(),
            key: Some(key.to_string()),
            message,
        }
    }

    fn number(&mut self, key: &str) -> std::result::Result<Option<(f64, usize)>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let x = e
            .value
            .parse::<f64>()
            .map_err(|_| self.bad(key, &e, "expected a number"))?;
        Ok(Some((x, e.line)))
    }

    /// `conflicts` are keys that may not appear together with `key`.
    fn optional_f64(&mut self, key: &str, conflicts: &[&str]) -> std::result::Result<Option<f64>, ConfigError> {
        let Some((x, line)) = self.number(key)? else {
            return Ok(None);
        };
        for other in conflicts {
            if let Some(o) = self.entries.get(other).map(|e| e.line).or_else(|| self.lines.get(*other).copied()) {
                return Err(ConfigError {
                    line: Some(line),
                    key: Some(key.to_string()),
                    message: format!("conflicts with `{other}` on line {o}"),
                });
            }
        }
        self.lines.insert(key.to_string(), line);
        Ok(Some(x))
    }

    fn required_f64(&mut self, key: &str) -> std::result::Result<f64, ConfigError> {
        self.optional_f64(key, &[])?.ok_or_else(|| self.missing(key))
    }

    fn optional_int(&mut self, key: &str) -> std::result::Result<Option<usize>, ConfigError> {
        let Some(e) = self.take(key) else {
            return Ok(None);
        };
        let v = e
            .value
            .parse::<usize>()
            .map_err(|_| self.bad(key, &e, "expected a non-negative integer"))?;
        self.lines.insert(key.to_string(), e.line);
        Ok(Some(v))
    }

    /// Shorthand `both` or the per-index keys, never a mix.
    fn pair_f64(
        &mut self,
        both: &str,
        first: &str,
        second: &str,
    ) -> std::result::Result<(Option<f64>, Option<f64>), ConfigError> {
        let shared = self.number(both)?;
        let a = self.number(first)?;
        let b = self.number(second)?;
        if let Some((x, line)) = shared {
            if let Some((_, other)) = a.or(b) {
                let key = if a.is_some() { first } else { second };
                return Err(ConfigError {
                    line: Some(other),
                    key: Some(key.to_string()),
                    message: format!("conflicts with shorthand `{both}` on line {line}"),
                });
            }
            self.lines.insert(first.to_string(), line);
            self.lines.insert(second.to_string(), line);
            return Ok((Some(x), Some(x)));
        }
        if let Some((_, line)) = a {
            self.lines.insert(first.to_string(), line);
        }
        if let Some((_, line)) = b {
            self.lines.insert(second.to_string(), line);
        }
        Ok((a.map(|v| v.0), b.map(|v| v.0)))
    }
}

/// Physical and numerical invariants independent of the command.
pub fn validate(cfg: &RunConfig) -> Result<()> {
    cfg.base_point()?;
    cfg.floquet.validate()?;
    if !(cfg.tc_eps > 0.0 && cfg.tc_eps.is_finite()) {
        return Err(crate::error::invalid("tc.eps", "must be > 0"));
    }
    if cfg.oracle.n_traj < 2 {
        return Err(crate::error::invalid("oracle.n_traj", "need at least 2 trajectories"));
    }
    if let Some(dt) = cfg.oracle.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(crate::error::invalid("oracle.dt", "must be > 0"));
        }
    }
    if let Some(t) = cfg.oracle.t_end {
        if !(t > 0.0 && t.is_finite()) {
            return Err(crate::error::invalid("oracle.t_end", "must be > 0"));
        }
    }
    if let BathInput::Raw { n, m_re, m_im } = cfg.baths[0] {
        raw_finite("bath1.N", &[n, m_re, m_im])?;
    }
    if let BathInput::Raw { n, m_re, m_im } = cfg.baths[1] {
        raw_finite("bath2.N", &[n, m_re, m_im])?;
    }
    Ok(())
}

fn raw_finite(field: &'static str, values: &[f64]) -> Result<()> {
    if values.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(crate::error::invalid(field, "raw bath values must be finite"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = "\
# paper point
J = 0.7
gamma = 0.5   # both modes
omega = 1
T = 0
r = 0.1
";

    #[test]
    fn shorthand_expands_to_both_modes() {
        let cfg = parse(PAPER).unwrap();
        assert_eq!((cfg.gamma1, cfg.gamma2), (0.5, 0.5));
        assert_eq!(cfg.baths[0], cfg.baths[1]);
        assert_eq!(
            cfg.baths[0],
            BathInput::Spec {
                nbar: None,
                r: 0.1,
                phi: 0.0
            }
        );
        assert_eq!(cfg.temperature, Some(0.0));
        assert_eq!(cfg.tc_eps, DEFAULT_TC_EPS);
    }

    #[test]
    fn canonical_form_round_trips() {
        let text = format!("{PAPER}grid.r1 = 0:1:11\ngrid.J = 0.3,0.7,1.2\nseed = 42\nmode = sweep\n");
        let cfg = parse(&text).unwrap();
        let canonical = cfg.to_config_string();
        let again = parse(&canonical).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.to_config_string(), canonical);
    }

    #[test]
    fn field_errors_carry_line_numbers() {
        let err = parse("J = 0.7\n\ngamma = -1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert!(err.key.as_deref().unwrap().starts_with("gamma"), "{err}");

        let err = parse("J = 0.7\ngamma = 0.5\nbath2.r = -0.2\n").unwrap_err();
        assert_eq!((err.line, err.key.as_deref()), (Some(3), Some("bath2.r")));

        let err = parse("J = 0.7\ngamma = 0.5\nbogus = 1\n").unwrap_err();
        assert_eq!(err.line, Some(3));
        assert_eq!(parse("gamma = 0.5").unwrap_err().key.as_deref(), Some("J"));
    }

    #[test]
    fn conflicting_keys_are_rejected() {
        assert!(parse("J = 1\ngamma = 0.5\ngamma1 = 0.4\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\nT = 0.1\nbath1.nbar = 2\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\nbath1.N = 0.1\nbath1.r = 0.2\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\nJ = 2\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\ngrid.r = 0:1:3\ngrid.r1 = 0:1:3\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\ngrid.r = 0:1:3\ngrid.J = 0:1:3\ngrid.T = 0:1:3\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\nbath1.N = 1\ngrid.r1 = 0:1:3\n").is_err());
    }

    #[test]
    fn axis_syntax() {
        assert!(parse("J = 1\ngamma = 0.5\ngrid.r = 0:1:1\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\ngrid.r = 1:0:5\n").is_err());
        assert!(parse("J = 1\ngamma = 0.5\ngrid.J = -1,2\n").is_err());
        let cfg = parse("J = 1\ngamma = 0.5\ngrid.phi1 = -1,2\ngrid.r2 = 0.5\n").unwrap();
        let points = cfg.grid.points();
        assert_eq!(points.len(), 2);
        assert_eq!(points[0], vec![(AxisName::Phi1, -1.0), (AxisName::R2, 0.5)]);
    }

    #[test]
    fn grid_is_row_major() {
        let cfg = parse("J = 1\ngamma = 0.5\ngrid.r1 = 0,1\ngrid.r2 = 0,1,2\n").unwrap();
        let flat: Vec<(f64, f64)> = cfg.grid.points().iter().map(|p| (p[0].1, p[1].1)).collect();
        assert_eq!(
            flat,
            vec![(0.0, 0.0), (0.0, 1.0), (0.0, 2.0), (1.0, 0.0), (1.0, 1.0), (1.0, 2.0)]
        );
    }

    #[test]
    fn temperature_sets_thermal_occupation() {
        let cfg = parse("J = 1\ngamma = 0.5\nomega1 = 2\nT = 0.5\n").unwrap();
        let p = cfg.base_point().unwrap();
        let expected = 1.0 / (4.0f64.exp() - 1.0);
        assert!((p.baths[0].spec().unwrap().nbar() - expected).abs() < 1e-15);
    }

    #[test]
    fn number_format_round_trips() {
        for x in [0.0, -0.0, 1.0, 0.1, 1e-300, 123456.789, 1e20, std::f64::consts::PI, 5e-5] {
            assert_eq!(fmt_num(x).parse::<f64>().unwrap().to_bits(), x.to_bits(), "{x}");
        }
    }
}
