//! Sweep configuration: a TOML file with `[params]`, `[[axis]]`, `[run]` and
//! per-task sections.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use spinlase_core::ModelParams;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}:{line}:{column}: unknown key `{key}`")]
    UnknownKey {
        path: String,
        key: String,
        line: usize,
        column: usize,
    },
    #[error("{what}: {reason}")]
    Range { what: String, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

fn range(what: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Range {
        what: what.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    PhaseDiagram,
    Hysteresis,
    Spectra,
    SqueezeMap,
    QSnapshots,
    ExactSteadyState,
}

impl Task {
    pub const ALL: [Task; 6] = [
        Task::PhaseDiagram,
        Task::Hysteresis,
        Task::Spectra,
        Task::SqueezeMap,
        Task::QSnapshots,
        Task::ExactSteadyState,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Task::PhaseDiagram => "phase-diagram",
            Task::Hysteresis => "hysteresis",
            Task::Spectra => "spectra",
            Task::SqueezeMap => "squeeze-map",
            Task::QSnapshots => "q-snapshots",
            Task::ExactSteadyState => "exact-steady-state",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        Task::ALL.into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sweepable parameter names.
pub const PARAM_NAMES: [&str; 9] = [
    "n_spins",
    "g",
    "g_sqrt_n",
    "delta",
    "epsilon",
    "kappa",
    "gamma",
    "pump_w",
    "gamma_phi",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: String,
    #[serde(default)]
    pub min: f64,
    #[serde(default)]
    pub max: f64,
    #[serde(default)]
    pub count: usize,
    #[serde(default = "linear")]
    pub scale: Scale,
    /// Explicit grid; replaces `min`, `max` and `count` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

fn linear() -> Scale {
    Scale::Linear
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if let Some(v) = &self.values {
            return v.clone();
        }
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|k| {
                let f = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.min + (self.max - self.min) * f,
                    Scale::Log => (self.min.ln() + (self.max.ln() - self.min.ln()) * f).exp(),
                }
            })
            .map(|v| if self.name == "n_spins" { v.round() } else { v })
            .collect()
    }
}

/// Fixed parameters; defaults: N = 1000, Δ = κ = γ_φ = g√N = 1, γ = 0.01, w = 0.2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default = "default_n")]
    pub n_spins: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_sqrt_n: Option<f64>,
    #[serde(default = "one")]
    pub delta: f64,
    #[serde(default)]
    pub epsilon: f64,
    #[serde(default = "one")]
    pub kappa: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default = "default_pump")]
    pub pump_w: f64,
    #[serde(default = "one")]
    pub gamma_phi: f64,
}

fn default_n() -> u64 {
    1000
}
fn one() -> f64 {
    1.0
}
fn default_gamma() -> f64 {
    0.01
}
fn default_pump() -> f64 {
    0.2
}

impl Default for Params {
    fn default() -> Self {
        toml::from_str("").expect("empty params table")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Run {
    #[serde(default = "default_tasks")]
    pub tasks: Vec<Task>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// 0 means one worker per available core.
    #[serde(default)]
    pub jobs: usize,
}

fn default_tasks() -> Vec<Task> {
    vec![Task::PhaseDiagram]
}

impl Default for Run {
    fn default() -> Self {
        Self {
            tasks: default_tasks(),
            out: None,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HysteresisSettings {
    /// Ramp range; taken from the `pump_w` axis when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_min: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_max: Option<f64>,
    pub steps: usize,
    /// Relaxation cap per step, in units of 1/Γ.
    pub max_time_gamma: f64,
}

impl Default for HysteresisSettings {
    fn default() -> Self {
        Self {
            w_min: None,
            w_max: None,
            steps: 121,
            max_time_gamma: 1e4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectraSettings {
    /// Grid half-width in units of κ_a.
    pub omega_max: f64,
    pub points: usize,
    /// Keep `D_a` in the noise matrix; when false the spectra use `D_a = 0`.
    pub amplitude_diffusion: bool,
}

impl Default for SpectraSettings {
    fn default() -> Self {
        Self {
            omega_max: 5.0,
            points: 201,
            amplitude_diffusion: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QSettings {
    pub times: Vec<f64>,
    pub half_width: f64,
    pub points: usize,
    /// Initial amplitude offset and phase of the Green's function.
    pub z0: f64,
    pub phi0: f64,
    pub tol: f64,
}

impl Default for QSettings {
    fn default() -> Self {
        Self {
            times: vec![0.0, 1.0, 4.0],
            half_width: 8.0,
            points: 81,
            z0: 0.0,
            phi0: 0.0,
            tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExactSettings {
    pub n_cut_start: usize,
    pub n_cut_max: usize,
    pub tail_tol: f64,
    pub tail_window: usize,
}

impl Default for ExactSettings {
    fn default() -> Self {
        Self {
            n_cut_start: 8,
            n_cut_max: 256,
            tail_tol: 1e-8,
            tail_window: 5,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    params: Params,
    #[serde(default)]
    axis: Vec<Axis>,
    #[serde(default)]
    run: Run,
    #[serde(default)]
    hysteresis: HysteresisSettings,
    #[serde(default)]
    spectra: SpectraSettings,
    #[serde(default)]
    q_snapshots: QSettings,
    #[serde(default)]
    exact: ExactSettings,
}

/// Fully resolved sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub params: Params,
    pub axes: Vec<Axis>,
    pub run: Run,
    pub hysteresis: HysteresisSettings,
    pub spectra: SpectraSettings,
    pub q_snapshots: QSettings,
    pub exact: ExactSettings,
}

/// One grid point: axis coordinates and the resolved model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub index: usize,
    pub params: ModelParams,
}

impl SweepSpec {
    pub fn from_str(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| toml_error(&e, text, origin))?;
        let mut axes = raw.axis;
        for a in &mut axes {
            if let Some(v) = &a.values {
                a.count = v.len();
                a.min = v.iter().cloned().fold(f64::INFINITY, f64::min);
                a.max = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            }
        }
        let mut spec = SweepSpec {
            params: raw.params,
            axes,
            run: raw.run,
            hysteresis: raw.hysteresis,
            spectra: raw.spectra,
            q_snapshots: raw.q_snapshots,
            exact: raw.exact,
        };
        spec.check()?;
        if spec.params.g.is_none() && !spec.uses("g") && !spec.uses("g_sqrt_n") {
            spec.params.g_sqrt_n.get_or_insert(1.0);
        }
        Ok(spec)
    }

    fn uses(&self, name: &str) -> bool {
        self.axes.iter().any(|a| a.name == name)
    }

    fn check(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        let collective_axis = self.uses("g_sqrt_n");
        let single_axis = self.uses("g");
        let given = [
            p.g.is_some(),
            p.g_sqrt_n.is_some(),
            single_axis,
            collective_axis,
        ];
        if given.iter().filter(|&&b| b).count() > 1 {
            return Err(range(
                "coupling",
                "set exactly one of g and g_sqrt_n (as a parameter or an axis)",
            ));
        }
        if self.run.tasks.is_empty() {
            return Err(range("run.tasks", "must name at least one task"));
        }
        for (k, a) in self.axes.iter().enumerate() {
            let what = format!("axis[{k}] ({})", a.name);
            if !PARAM_NAMES.contains(&a.name.as_str()) {
                return Err(range(
                    what,
                    format!(
                        "unknown parameter; expected one of {}",
                        PARAM_NAMES.join(", ")
                    ),
                ));
            }
            if self.axes[..k].iter().any(|b| b.name == a.name) {
                return Err(range(what, "parameter swept twice"));
            }
            if a.count < 1 {
                return Err(range(what, "count must be at least 1"));
            }
            if !(a.min.is_finite() && a.max.is_finite()) || a.max < a.min {
                return Err(range(what, "needs finite min <= max"));
            }
            if a.scale == Scale::Log && a.min <= 0.0 {
                return Err(range(what, "log axis needs min > 0"));
            }
            if a.values
                .as_ref()
                .is_some_and(|v| v.iter().any(|x| !x.is_finite()))
            {
                return Err(range(what, "values must be finite"));
            }
            if a.name == "n_spins" && a.min < 1.0 {
                return Err(range(what, "n_spins must be at least 1"));
            }
        }
        if self.hysteresis.steps < 2 {
            return Err(range("hysteresis.steps", "must be at least 2"));
        }
        if self.run.tasks.contains(&Task::Hysteresis) {
            let (lo, hi) = self.ramp_range()?;
            if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && hi > lo) {
                return Err(range("hysteresis", "ramp needs 0 <= w_min < w_max"));
            }
        }
        if self.spectra.points < 2 || !(self.spectra.omega_max > 0.0) {
            return Err(range("spectra", "needs points >= 2 and omega_max > 0"));
        }
        let q = &self.q_snapshots;
        if q.points < 2
            || !(q.half_width > 0.0)
            || q.times.iter().any(|t| !(*t >= 0.0))
            || !(q.tol > 0.0)
        {
            return Err(range(
                "q_snapshots",
                "needs points >= 2, half_width > 0, tol > 0 and times >= 0",
            ));
        }
        let e = &self.exact;
        if e.n_cut_start < 1
            || e.n_cut_max < e.n_cut_start
            || !(e.tail_tol > 0.0)
            || e.tail_window < 1
        {
            return Err(range(
                "exact",
                "needs 1 <= n_cut_start <= n_cut_max, tail_tol > 0, tail_window >= 1",
            ));
        }
        // every corner of the grid must be a valid model
        let corners = 1usize << self.axes.len().min(16);
        for mask in 0..corners {
            let vals: Vec<f64> = self
                .axes
                .iter()
                .enumerate()
                .map(|(k, a)| if mask >> k & 1 == 1 { a.max } else { a.min })
                .collect();
            let m = self.resolve(&vals);
            m.validate().map_err(|e| range("params", e.to_string()))?;
        }
        Ok(())
    }

    /// Pump range for hysteresis ramps.
    pub fn ramp_range(&self) -> Result<(f64, f64), ConfigError> {
        let axis = self.axes.iter().find(|a| a.name == "pump_w");
        let lo = self.hysteresis.w_min.or(axis.map(|a| a.min));
        let hi = self.hysteresis.w_max.or(axis.map(|a| a.max));
        match (lo, hi) {
            (Some(lo), Some(hi)) => Ok((lo, hi)),
            _ => Err(range("hysteresis", "set w_min and w_max or sweep pump_w")),
        }
    }

    /// Model at the given axis coordinates (one value per axis, in order).
    pub fn resolve(&self, coords: &[f64]) -> ModelParams {
        let p = &self.params;
        let mut m = ModelParams {
            n_spins: p.n_spins,
            g: 0.0,
            delta: p.delta,
            epsilon: p.epsilon,
            kappa: p.kappa,
            gamma: p.gamma,
            pump_w: p.pump_w,
            gamma_phi: p.gamma_phi,
        };
        let mut g = p.g;
        let mut g_sqrt_n = p.g_sqrt_n;
        for (a, &v) in self.axes.iter().zip(coords) {
            match a.name.as_str() {
                "n_spins" => m.n_spins = v as u64,
                "g" => g = Some(v),
                "g_sqrt_n" => g_sqrt_n = Some(v),
                "delta" => m.delta = v,
                "epsilon" => m.epsilon = v,
                "kappa" => m.kappa = v,
                "gamma" => m.gamma = v,
                "pump_w" => m.pump_w = v,
                "gamma_phi" => m.gamma_phi = v,
                _ => unreachable!("axis names are checked"),
            }
        }
        m.g = match g {
            Some(g) => g,
            None => g_sqrt_n.unwrap_or(1.0) / m.n().sqrt(),
        };
        m
    }

    /// Grid points in canonical order: the last axis varies fastest.
    pub fn points(&self) -> Vec<Point> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let total: usize = values.iter().map(Vec::len).product();
        (0..total)
            .map(|index| {
                let coords = self.coords(&values, index);
                Point {
                    index,
                    params: self.resolve(&coords),
                }
            })
            .collect()
    }

    fn coords(&self, values: &[Vec<f64>], mut index: usize) -> Vec<f64> {
        let mut c = vec![0.0; values.len()];
        for k in (0..values.len()).rev() {
            c[k] = values[k][index % values[k].len()];
            index /= values[k].len();
        }
        c
    }

    /// Grid of the non-pump axes, used as ramp origins for hysteresis.
    pub fn ramp_points(&self) -> Vec<Point> {
        let mut reduced = self.clone();
        if let Some(k) = reduced.axes.iter().position(|a| a.name == "pump_w") {
            reduced.axes.remove(k);
        }
        reduced.points()
    }

    pub fn axis_shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.count).collect()
    }
}

pub fn load_config(path: &Path) -> Result<SweepSpec, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SweepSpec::from_str(&text, &path.display().to_string())
}

fn toml_error(e: &toml::de::Error, text: &str, origin: &str) -> ConfigError {
    let offset = e.span().map(|s| s.start).unwrap_or(0).min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rsplit('\n')
        .next()
        .map(|s| s.chars().count())
        .unwrap_or(0)
        + 1;
    let message = e.message().to_string();
    if let Some(rest) = message.strip_prefix("unknown field `") {
        let key = rest.split('`').next().unwrap_or_default().to_string();
        return ConfigError::UnknownKey {
            path: origin.to_string(),
            key,
            line,
            column,
        };
    }
    ConfigError::Parse {
        path: origin.to_string(),
        line,
        column,
        message,
    }
}
