//! Plain-text `key = value` run configuration.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Vectors are written as comma-separated reals (`1, 0, 0`), explicit node
//! lists as `;`-separated vectors. Every key has a default, so an empty file
//! is a valid configuration.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::dynamics::{EquilibriumPoint, PeriodicInput, SimParams};
use crate::grid_field::{GridSpec, MagnetizationField, Vec3};
use crate::integrator::{Constraint, IntegratorConfig, Scheme, TimeStep};
use crate::lyapunov::f_admissible;

/// Every recognised key with its default and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    (
        "experiment",
        "stabilize",
        "stabilize | hysteresis | verify | sweep",
    ),
    (
        "grid.n",
        "64",
        "number of cells N (nodes at j*L/N, j = 0..N)",
    ),
    ("grid.length", "1", "wire length L"),
    ("physics.nu", "0.02", "damping parameter nu >= 0"),
    ("control.k", "0.25", "feedback gain k > 0 in u = k (r - m)"),
    ("control.f_rule", "f_equals_k", "f_equals_k | constant"),
    (
        "control.f_value",
        "0.25",
        "f(k) when control.f_rule = constant",
    ),
    ("control.r", "1, 0, 0", "target equilibrium r (unit vector)"),
    (
        "initial.preset",
        "auto",
        "auto | perturbed | target | uniform | explicit",
    ),
    (
        "initial.amplitude",
        "0.1",
        "bump amplitude for the perturbed preset",
    ),
    (
        "initial.direction",
        "1, 0, 0",
        "constant direction for the uniform preset",
    ),
    (
        "initial.nodes",
        "",
        "explicit N+1 node vectors separated by ';'",
    ),
    (
        "integrator.dt",
        "auto",
        "time step, or auto for the stability-limited default",
    ),
    (
        "integrator.scheme",
        "rk4_projected",
        "rk4_projected | euler_projected",
    ),
    (
        "integrator.cfl_safety",
        "0.5",
        "safety factor in (0, 1] applied to the auto step",
    ),
    (
        "integrator.constraint",
        "auto",
        "auto | project | free (auto: free for hysteresis runs)",
    ),
    (
        "stabilize.t_end",
        "200",
        "final time of a stabilization run",
    ),
    (
        "stabilize.tol_conv",
        "0.001",
        "L2 error below which the run counts as converged",
    ),
    ("stabilize.stride", "1000", "steps between recorded samples"),
    (
        "hysteresis.amplitude",
        "0.01",
        "input amplitude a in a cos(omega t)",
    ),
    (
        "hysteresis.omegas",
        "1, 0.1, 0.01",
        "input angular frequencies",
    ),
    (
        "hysteresis.component",
        "1",
        "driven and observed component i (1, 2 or 3)",
    ),
    ("hysteresis.xstar", "1", "sampling location x* in [0, L]"),
    (
        "hysteresis.periods",
        "3",
        "forcing periods per run (>= 3; the last one is measured)",
    ),
    (
        "hysteresis.samples_per_period",
        "1000",
        "recorded samples per forcing period",
    ),
];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },

    #[error("{}`{key}`: {message}", line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Invalid {
        line: Option<usize>,
        key: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Stabilize,
    Hysteresis,
    Verify,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Stabilize => "stabilize",
            ExperimentKind::Hysteresis => "hysteresis",
            ExperimentKind::Verify => "verify",
            ExperimentKind::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GainRule {
    FEqualsK,
    Constant(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialPreset {
    /// `target` for hysteresis and sweep runs, `perturbed` otherwise.
    Auto,
    /// Cosine bump about `r`.
    Perturbed,
    /// `m0 ≡ r`.
    Target,
    Uniform,
    Explicit,
}

impl InitialPreset {
    fn name(self) -> &'static str {
        match self {
            InitialPreset::Auto => "auto",
            InitialPreset::Perturbed => "perturbed",
            InitialPreset::Target => "target",
            InitialPreset::Uniform => "uniform",
            InitialPreset::Explicit => "explicit",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    pub grid_n: usize,
    pub length: f64,
    pub nu: f64,
    pub k: f64,
    pub gain_rule: GainRule,
    pub r: Vec3,
    pub initial: InitialPreset,
    pub initial_amplitude: f64,
    pub initial_direction: Vec3,
    pub initial_nodes: Vec<Vec3>,
    pub dt: TimeStep,
    pub scheme: Scheme,
    pub cfl_safety: f64,
    /// `None` selects per experiment.
    pub constraint: Option<Constraint>,
    pub t_end: f64,
    pub tol_conv: f64,
    pub stride: usize,
    pub amplitude: f64,
    pub omegas: Vec<f64>,
    pub component: usize,
    pub xstar: f64,
    pub periods: usize,
    pub samples_per_period: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        parse_config("").expect("defaults are valid").config
    }
}

/// A validated configuration plus non-fatal diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed {
    pub config: RunConfig,
    pub warnings: Vec<String>,
}

struct Entries {
    values: HashMap<&'static str, (String, Option<usize>)>,
}

impl Entries {
    fn raw(&self, key: &'static str) -> (&str, Option<usize>) {
        let (v, line) = &self.values[key];
        (v.as_str(), *line)
    }

    fn invalid(&self, key: &'static str, message: impl Into<String>) -> ConfigError {
        ConfigError::Invalid {
            line: self.values[key].1,
            key,
            message: message.into(),
        }
    }

    fn real(&self, key: &'static str) -> Result<f64, ConfigError> {
        let (v, _) = self.raw(key);
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Ok(x),
            _ => Err(self.invalid(key, format!("expected a finite real, got `{v}`"))),
        }
    }

    fn count(&self, key: &'static str) -> Result<usize, ConfigError> {
        let (v, _) = self.raw(key);
        v.parse::<usize>()
            .map_err(|_| self.invalid(key, format!("expected a nonnegative integer, got `{v}`")))
    }

    fn reals(&self, key: &'static str) -> Result<Vec<f64>, ConfigError> {
        let (v, _) = self.raw(key);
        if v.trim().is_empty() {
            return Ok(Vec::new());
        }
        v.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| {
                        self.invalid(key, format!("`{}` is not a finite real", s.trim()))
                    })
            })
            .collect()
    }

    fn vector(&self, key: &'static str) -> Result<Vec3, ConfigError> {
        let xs = self.reals(key)?;
        match xs.as_slice() {
            [a, b, c] => Ok(Vec3::new(*a, *b, *c)),
            _ => Err(self.invalid(key, format!("expected 3 components, got {}", xs.len()))),
        }
    }

    fn word<T>(&self, key: &'static str, options: &[(&str, T)]) -> Result<T, ConfigError>
    where
        T: Copy,
    {
        let (v, _) = self.raw(key);
        options
            .iter()
            .find(|(name, _)| *name == v)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                let names: Vec<&str> = options.iter().map(|(n, _)| *n).collect();
                self.invalid(
                    key,
                    format!("expected one of {}, got `{v}`", names.join(" | ")),
                )
            })
    }
}

fn lookup_key(key: &str) -> Option<&'static str> {
    KEYS.iter().map(|(k, _, _)| *k).find(|k| *k == key)
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<Parsed, ConfigError> {
    let mut values: HashMap<&'static str, (String, Option<usize>)> = KEYS
        .iter()
        .map(|(k, d, _)| (*k, (d.to_string(), None)))
        .collect();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: raw_line.to_string(),
            });
        };
        let key = key.trim();
        let Some(known) = lookup_key(key) else {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        let slot = values.get_mut(known).expect("all keys seeded");
        if slot.1.is_some() {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        *slot = (value.trim().to_string(), Some(line));
    }
    validate(&Entries { values })
}

fn validate(e: &Entries) -> Result<Parsed, ConfigError> {
    let mut warnings = Vec::new();

    let experiment = e.word(
        "experiment",
        &[
            ("stabilize", ExperimentKind::Stabilize),
            ("hysteresis", ExperimentKind::Hysteresis),
            ("verify", ExperimentKind::Verify),
            ("sweep", ExperimentKind::Sweep),
        ],
    )?;

    let grid_n = e.count("grid.n")?;
    let length = e.real("grid.length")?;
    GridSpec::new(grid_n, length).map_err(|err| {
        let key = if grid_n < 2 { "grid.n" } else { "grid.length" };
        e.invalid(key, err.to_string())
    })?;

    let nu = e.real("physics.nu")?;
    if nu < 0.0 {
        return Err(e.invalid("physics.nu", format!("damping must be >= 0, got {nu}")));
    }
    let k = e.real("control.k")?;
    if k <= 0.0 {
        return Err(e.invalid("control.k", format!("gain must be > 0, got {k}")));
    }
    let rule = e.word(
        "control.f_rule",
        &[("f_equals_k", false), ("constant", true)],
    )?;
    let gain_rule = if rule {
        GainRule::Constant(e.real("control.f_value")?)
    } else {
        GainRule::FEqualsK
    };
    let f_of_k = match gain_rule {
        GainRule::FEqualsK => k,
        GainRule::Constant(f) => f,
    };
    if !f_admissible(f_of_k, k) {
        let key = if rule { "control.f_value" } else { "control.k" };
        return Err(e.invalid(
            key,
            format!("f(k) = {f_of_k}, k = {k} violates f(k) > 0 and |f(k) + k| <= 1"),
        ));
    }

    let r = e.vector("control.r")?;
    let target = EquilibriumPoint::new(r).map_err(|err| e.invalid("control.r", err.to_string()))?;
    if !target.has_nonzero_first_component() {
        warnings.push(format!(
            "control.r = ({}, {}, {}) has r1 = 0; the collinearity argument assumes r1 != 0",
            r.x1, r.x2, r.x3
        ));
    }

    let initial = e.word(
        "initial.preset",
        &[
            ("auto", InitialPreset::Auto),
            ("perturbed", InitialPreset::Perturbed),
            ("target", InitialPreset::Target),
            ("uniform", InitialPreset::Uniform),
            ("explicit", InitialPreset::Explicit),
        ],
    )?;
    let initial_amplitude = e.real("initial.amplitude")?;
    let initial_direction = e.vector("initial.direction")?;
    if initial == InitialPreset::Uniform && (initial_direction.norm() - 1.0).abs() > 1e-12 {
        return Err(e.invalid(
            "initial.direction",
            "uniform initial direction must be a unit vector",
        ));
    }
    let (nodes_text, _) = e.raw("initial.nodes");
    let mut initial_nodes = Vec::new();
    for chunk in nodes_text
        .split(';')
        .map(str::trim)
        .filter(|c| !c.is_empty())
    {
        let xs: Vec<f64> = chunk
            .split(',')
            .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| e.invalid("initial.nodes", format!("bad node `{chunk}`")))?;
        match xs.as_slice() {
            [a, b, c] => initial_nodes.push(Vec3::new(*a, *b, *c)),
            _ => {
                return Err(e.invalid(
                    "initial.nodes",
                    format!("node `{chunk}` needs 3 components"),
                ));
            }
        }
    }
    if initial == InitialPreset::Explicit && initial_nodes.len() != grid_n + 1 {
        return Err(e.invalid(
            "initial.nodes",
            format!("expected {} nodes, got {}", grid_n + 1, initial_nodes.len()),
        ));
    }

    let dt = match e.raw("integrator.dt").0 {
        "auto" => TimeStep::Auto,
        _ => {
            let dt = e.real("integrator.dt")?;
            if dt <= 0.0 {
                return Err(e.invalid("integrator.dt", "time step must be > 0"));
            }
            TimeStep::Fixed(dt)
        }
    };
    let scheme = e.word(
        "integrator.scheme",
        &[
            ("rk4_projected", Scheme::Rk4Projected),
            ("euler_projected", Scheme::EulerProjected),
        ],
    )?;
    let cfl_safety = e.real("integrator.cfl_safety")?;
    if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
        return Err(e.invalid("integrator.cfl_safety", "must lie in (0, 1]"));
    }
    let constraint = e.word(
        "integrator.constraint",
        &[
            ("auto", None),
            ("project", Some(Constraint::Project)),
            ("free", Some(Constraint::Free)),
        ],
    )?;

    let t_end = e.real("stabilize.t_end")?;
    if t_end < 0.0 {
        return Err(e.invalid("stabilize.t_end", "must be >= 0"));
    }
    let tol_conv = e.real("stabilize.tol_conv")?;
    if tol_conv <= 0.0 {
        return Err(e.invalid("stabilize.tol_conv", "must be > 0"));
    }
    let stride = e.count("stabilize.stride")?;
    if stride == 0 {
        return Err(e.invalid("stabilize.stride", "must be >= 1"));
    }

    let amplitude = e.real("hysteresis.amplitude")?;
    let omegas = e.reals("hysteresis.omegas")?;
    if omegas.is_empty() || omegas.iter().any(|w| *w <= 0.0) {
        return Err(e.invalid("hysteresis.omegas", "need one or more positive frequencies"));
    }
    let component = e.count("hysteresis.component")?;
    PeriodicInput::new(amplitude, omegas[0], component)
        .map_err(|err| e.invalid("hysteresis.component", err.to_string()))?;
    let xstar = e.real("hysteresis.xstar")?;
    if !(0.0..=length).contains(&xstar) {
        return Err(e.invalid("hysteresis.xstar", format!("must lie in [0, {length}]")));
    }
    let periods = e.count("hysteresis.periods")?;
    if periods < 3 {
        return Err(e.invalid("hysteresis.periods", "need at least 3 periods"));
    }
    let samples_per_period = e.count("hysteresis.samples_per_period")?;
    if samples_per_period < 3 {
        return Err(e.invalid("hysteresis.samples_per_period", "need at least 3 samples"));
    }

    Ok(Parsed {
        config: RunConfig {
            experiment,
            grid_n,
            length,
            nu,
            k,
            gain_rule,
            r,
            initial,
            initial_amplitude,
            initial_direction,
            initial_nodes,
            dt,
            scheme,
            cfl_safety,
            constraint,
            t_end,
            tol_conv,
            stride,
            amplitude,
            omegas,
            component,
            xstar,
            periods,
            samples_per_period,
        },
        warnings,
    })
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

fn vec_text(v: Vec3) -> String {
    join(&v.to_array())
}

impl RunConfig {
    pub fn f_of_k(&self) -> f64 {
        match self.gain_rule {
            GainRule::FEqualsK => self.k,
            GainRule::Constant(f) => f,
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.grid_n, self.length).expect("validated at parse time")
    }

    pub fn sim_params(&self) -> SimParams {
        SimParams::new(self.nu, self.k, self.f_of_k(), self.grid())
            .expect("validated at parse time")
    }

    pub fn target(&self) -> EquilibriumPoint {
        EquilibriumPoint::new(self.r).expect("validated at parse time")
    }

    fn hysteresis_like(&self) -> bool {
        matches!(
            self.experiment,
            ExperimentKind::Hysteresis | ExperimentKind::Sweep
        )
    }

    pub fn resolved_constraint(&self) -> Constraint {
        self.constraint.unwrap_or(if self.hysteresis_like() {
            Constraint::Free
        } else {
            Constraint::Project
        })
    }

    pub fn integrator(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.dt,
            scheme: self.scheme,
            cfl_safety: self.cfl_safety,
            constraint: self.resolved_constraint(),
        }
    }

    pub fn resolved_preset(&self) -> InitialPreset {
        match self.initial {
            InitialPreset::Auto if self.hysteresis_like() => InitialPreset::Target,
            InitialPreset::Auto => InitialPreset::Perturbed,
            other => other,
        }
    }

    /// Initial magnetization for the configured preset, aimed at `r`.
    pub fn initial_field(&self, r: EquilibriumPoint) -> crate::Result<MagnetizationField> {
        let grid = self.grid();
        match self.resolved_preset() {
            InitialPreset::Perturbed => {
                crate::experiments::default_initial_condition(grid, r, self.initial_amplitude)
            }
            InitialPreset::Target | InitialPreset::Auto => {
                MagnetizationField::constant(grid, r.vector())
            }
            InitialPreset::Uniform => MagnetizationField::constant(grid, self.initial_direction),
            InitialPreset::Explicit => {
                MagnetizationField::from_values(grid, self.initial_nodes.clone())
            }
        }
    }

    /// Canonical text form listing every key; parses back to an equal config.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let (rule, f_value) = match self.gain_rule {
            GainRule::FEqualsK => ("f_equals_k", self.k),
            GainRule::Constant(f) => ("constant", f),
        };
        let nodes = self
            .initial_nodes
            .iter()
            .map(|v| vec_text(*v))
            .collect::<Vec<_>>()
            .join("; ");
        let dt = match self.dt {
            TimeStep::Auto => "auto".to_string(),
            TimeStep::Fixed(dt) => dt.to_string(),
        };
        let constraint = self.constraint.map_or("auto", Constraint::name);
        let pairs: [(&str, String); 25] = [
            ("experiment", self.experiment.name().into()),
            ("grid.n", self.grid_n.to_string()),
            ("grid.length", self.length.to_string()),
            ("physics.nu", self.nu.to_string()),
            ("control.k", self.k.to_string()),
            ("control.f_rule", rule.into()),
            ("control.f_value", f_value.to_string()),
            ("control.r", vec_text(self.r)),
            ("initial.preset", self.initial.name().into()),
            ("initial.amplitude", self.initial_amplitude.to_string()),
            ("initial.direction", vec_text(self.initial_direction)),
            ("initial.nodes", nodes),
            ("integrator.dt", dt),
            ("integrator.scheme", self.scheme.name().into()),
            ("integrator.cfl_safety", self.cfl_safety.to_string()),
            ("integrator.constraint", constraint.into()),
            ("stabilize.t_end", self.t_end.to_string()),
            ("stabilize.tol_conv", self.tol_conv.to_string()),
            ("stabilize.stride", self.stride.to_string()),
            ("hysteresis.amplitude", self.amplitude.to_string()),
            ("hysteresis.omegas", join(&self.omegas)),
            ("hysteresis.component", self.component.to_string()),
            ("hysteresis.xstar", self.xstar.to_string()),
            ("hysteresis.periods", self.periods.to_string()),
            (
                "hysteresis.samples_per_period",
                self.samples_per_period.to_string(),
            ),
        ];
        for (key, value) in pairs {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// Help text enumerating every key and its default.
pub fn keys_help() -> String {
    let mut out = String::from("Configuration keys (key = value, '#' comments):\n");
    for (key, default, what) in KEYS {
        let default = if default.is_empty() {
            "(none)"
        } else {
            default
        };
        let _ = writeln!(out, "  {key:<32} default {default:<14} {what}");
    }
    out
}
