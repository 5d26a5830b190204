//! Declarative run configuration, read from TOML.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use purify::dynamics::Route;
use purify::model::{InitialStateSpec, SystemSpec};
use purify::numkernel::OdeTolerances;
use purify::observables::Observable;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;
/// Upper bound on parameter points times output times.
pub const MAX_GRID_POINTS: usize = 10_000_000;
pub const MAX_AXES: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "defaults::n_qubits")]
    pub n_qubits: usize,
    #[serde(default)]
    pub omega: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub j_coupling: f64,
    #[serde(default = "defaults::gamma_e")]
    pub gamma_e: f64,
    #[serde(default)]
    pub gamma_f: f64,
    #[serde(default)]
    pub eta: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemSpec::default().into()
    }
}

impl From<SystemSpec> for SystemConfig {
    fn from(s: SystemSpec) -> Self {
        Self {
            n_qubits: s.n_qubits,
            omega: s.omega,
            delta: s.delta,
            j_coupling: s.j_coupling,
            gamma_e: s.gamma_e,
            gamma_f: s.gamma_f,
            eta: s.eta,
        }
    }
}

impl From<&SystemConfig> for SystemSpec {
    fn from(c: &SystemConfig) -> Self {
        SystemSpec {
            n_qubits: c.n_qubits,
            omega: c.omega,
            delta: c.delta,
            j_coupling: c.j_coupling,
            gamma_e: c.gamma_e,
            gamma_f: c.gamma_f,
            eta: c.eta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialStateConfig {
    DiagonalProduct {
        p: f64,
    },
    MaximallyMixed,
    SingleQubitCoherent {
        p: f64,
        #[serde(default)]
        c_re: f64,
        #[serde(default)]
        c_im: f64,
    },
}

impl Default for InitialStateConfig {
    fn default() -> Self {
        InitialStateConfig::DiagonalProduct { p: 0.5 }
    }
}

impl InitialStateConfig {
    /// The state with its population replaced by `p`, where that makes sense.
    pub fn with_p(&self, p: f64) -> Option<Self> {
        match *self {
            InitialStateConfig::DiagonalProduct { .. } => Some(InitialStateConfig::DiagonalProduct { p }),
            InitialStateConfig::SingleQubitCoherent { c_re, c_im, .. } => {
                Some(InitialStateConfig::SingleQubitCoherent { p, c_re, c_im })
            }
            InitialStateConfig::MaximallyMixed => None,
        }
    }

    pub fn to_spec(&self) -> InitialStateSpec {
        match *self {
            InitialStateConfig::DiagonalProduct { p } => InitialStateSpec::DiagonalProduct { p },
            InitialStateConfig::MaximallyMixed => InitialStateSpec::MaximallyMixed,
            InitialStateConfig::SingleQubitCoherent { p, c_re, c_im } => InitialStateSpec::SingleQubitCoherent {
                p,
                c: Complex64::new(c_re, c_im),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub t_max: f64,
    pub points: usize,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_max: 10.0,
            points: 1001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Omega,
    Eta,
    P,
    JCoupling,
    Time,
}

impl AxisName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxisName::Omega => "omega",
            AxisName::Eta => "eta",
            AxisName::P => "p",
            AxisName::JCoupling => "j_coupling",
            AxisName::Time => "time",
        }
    }
}

/// A swept parameter: either an explicit value list or `points` uniform
/// samples on `[min, max]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisConfig {
    pub name: AxisName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

impl AxisConfig {
    pub fn list(name: AxisName, values: &[f64]) -> Self {
        Self {
            name,
            values: Some(values.to_vec()),
            min: None,
            max: None,
            points: None,
        }
    }

    pub fn range(name: AxisName, min: f64, max: f64, points: usize) -> Self {
        Self {
            name,
            values: None,
            min: Some(min),
            max: Some(max),
            points: Some(points),
        }
    }

    pub fn len(&self) -> usize {
        match (&self.values, self.points) {
            (Some(v), _) => v.len(),
            (None, Some(n)) => n,
            (None, None) => 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn resolve(&self) -> Result<Vec<f64>, CliError> {
        let name = self.name.as_str();
        let values = match (&self.values, self.min, self.max, self.points) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(lo), Some(hi), Some(n)) => linspace(lo, hi, n),
            _ => {
                return Err(CliError::Config(format!(
                    "axis '{name}' needs either `values` or all of `min`, `max`, `points`"
                )))
            }
        };
        if values.is_empty() {
            return Err(CliError::Config(format!("axis '{name}' is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("axis '{name}' has non-finite values")));
        }
        Ok(values)
    }
}

/// `n` uniform samples on `[lo, hi]`; a single sample sits at `lo`.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceKind {
    /// Long-time limit of the post-selected dynamics from the same initial state.
    #[default]
    Asymptotic,
    MaximallyMixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points: usize,
    /// Append the degeneracy table (two qubits only).
    #[serde(default = "defaults::yes")]
    pub degeneracies: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrossingConfig {
    pub pairs: Vec<[f64; 2]>,
    #[serde(default = "defaults::crossing_observable")]
    pub observable: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default)]
    pub initial_state: InitialStateConfig,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub axes: Vec<AxisConfig>,
    #[serde(default = "defaults::observables")]
    pub observables: Vec<String>,
    #[serde(default = "defaults::route")]
    pub route: String,
    #[serde(default)]
    pub reference: ReferenceKind,
    /// Relative ODE tolerance; the absolute one is a hundredth of it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default)]
    pub mode_weights: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crossings: Option<CrossingConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_path: Option<PathBuf>,
}

mod defaults {
    pub fn n_qubits() -> usize {
        2
    }
    pub fn gamma_e() -> f64 {
        6.0
    }
    pub fn yes() -> bool {
        true
    }
    pub fn crossing_observable() -> String {
        "linear_entropy".into()
    }
    pub fn observables() -> Vec<String> {
        vec!["purity".into()]
    }
    pub fn route() -> String {
        "modes".into()
    }
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            system: SystemConfig::default(),
            initial_state: InitialStateConfig::default(),
            time: TimeConfig::default(),
            axes: Vec::new(),
            observables: defaults::observables(),
            route: defaults::route(),
            reference: ReferenceKind::default(),
            tol: None,
            mode_weights: false,
            spectrum: None,
            crossings: None,
            output_path: None,
        }
    }
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn spec(&self) -> SystemSpec {
        (&self.system).into()
    }

    pub fn route(&self) -> Result<Route, CliError> {
        self.route.parse().map_err(|_| {
            CliError::Config(format!(
                "unknown route '{}' (expected modes, ode, lindblad or twomode)",
                self.route
            ))
        })
    }

    pub fn tolerances(&self) -> OdeTolerances {
        match self.tol {
            Some(rel) => OdeTolerances { rel, abs: rel * 1e-2 },
            None => OdeTolerances::default(),
        }
    }

    pub fn parsed_observables(&self) -> Result<Vec<Observable>, CliError> {
        self.observables
            .iter()
            .map(|s| s.parse().map_err(|_| CliError::Config(format!("unknown observable '{s}'"))))
            .collect()
    }

    pub fn axis(&self, name: AxisName) -> Option<&AxisConfig> {
        self.axes.iter().find(|a| a.name == name)
    }

    /// Swept parameters other than time, in declaration order.
    pub fn parameter_axes(&self) -> impl Iterator<Item = &AxisConfig> {
        self.axes.iter().filter(|a| a.name != AxisName::Time)
    }

    pub fn time_points(&self) -> usize {
        self.axis(AxisName::Time).map_or(self.time.points, AxisConfig::len)
    }

    pub fn total_points(&self) -> usize {
        self.parameter_axes()
            .map(AxisConfig::len)
            .chain(std::iter::once(self.time_points()))
            .fold(1usize, |acc, n| acc.saturating_mul(n.max(1)))
    }

    /// Structural checks that need no numerics. Values that only the physics
    /// can reject (a negative drive, an unphysical state) surface when the run
    /// builds the system.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        self.spec().validate().map_err(|e| CliError::Config(e.to_string()))?;
        self.route()?;
        if let Some(tol) = self.tol {
            if !(tol > 0.0 && tol < 1.0) {
                return Err(CliError::Config(format!("tol = {tol} outside (0, 1)")));
            }
        }
        if self.axes.len() > MAX_AXES {
            return Err(CliError::Config(format!("at most {MAX_AXES} axes, got {}", self.axes.len())));
        }
        for (k, axis) in self.axes.iter().enumerate() {
            if self.axes[..k].iter().any(|a| a.name == axis.name) {
                return Err(CliError::Config(format!("axis '{}' given twice", axis.name.as_str())));
            }
            axis.resolve()?;
        }
        if self.axis(AxisName::P).is_some() && self.initial_state.with_p(0.0).is_none() {
            return Err(CliError::Config("a p axis needs a state with a population parameter".into()));
        }
        let total = self.total_points();
        if total > MAX_GRID_POINTS {
            return Err(CliError::GridTooLarge(total));
        }
        let dim = self.spec().dim();
        for obs in self.parsed_observables()? {
            if !obs.supports(dim) {
                return Err(CliError::Config(format!(
                    "observable '{obs}' is not defined for {} qubit(s)",
                    self.system.n_qubits
                )));
            }
        }
        if let Some(c) = &self.crossings {
            let obs: Observable = c
                .observable
                .parse()
                .map_err(|_| CliError::Config(format!("unknown observable '{}'", c.observable)))?;
            if !obs.supports(dim) {
                return Err(CliError::Config(format!("crossing observable '{obs}' is not defined here")));
            }
            if self.initial_state.with_p(0.0).is_none() {
                return Err(CliError::Config("crossing scans need a state with a population parameter".into()));
            }
        }
        if let Some(s) = &self.spectrum {
            if !(s.omega_min.is_finite() && s.omega_max.is_finite() && s.omega_min <= s.omega_max) {
                return Err(CliError::Config("spectrum needs finite omega_min <= omega_max".into()));
            }
            if s.points > MAX_GRID_POINTS {
                return Err(CliError::GridTooLarge(s.points));
            }
        }
        Ok(())
    }
}
