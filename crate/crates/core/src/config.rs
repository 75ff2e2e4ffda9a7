//! Experiment configuration: a TOML tree with documented defaults, dotted-key
//! overrides and validation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::params::ModelParams;
use crate::spectra::BoundaryKind;

/// Configuration problems; all map to the usage exit code.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid configuration: {0}")]
    Parse(String),
    #[error("invalid value for `{field}`: {reason}")]
    Field { field: String, reason: String },
    #[error("malformed override `{0}`: expected KEY=VALUE")]
    Override(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Speeds,
    Wave,
    Evolve,
    Verify,
    Eig,
    Sweep,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Speeds => "speeds",
            Mode::Wave => "wave",
            Mode::Evolve => "evolve",
            Mode::Verify => "verify",
            Mode::Eig => "eig",
            Mode::Sweep => "sweep",
        }
    }
}

/// A list of values given explicitly or as a linear/logarithmic spread.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RangeSpec {
    List(Vec<f64>),
    Log { log_start: f64, log_end: f64, count: usize },
    Linear { start: f64, end: f64, count: usize },
}

impl Default for RangeSpec {
    fn default() -> Self {
        RangeSpec::List(Vec::new())
    }
}

impl RangeSpec {
    /// The values; `Log` spreads `10^log_start .. 10^log_end`.
    pub fn values(&self) -> Vec<f64> {
        let spread = |s: f64, e: f64, n: usize| -> Vec<f64> {
            match n {
                0 => Vec::new(),
                1 => vec![s],
                _ => (0..n).map(|k| s + (e - s) * k as f64 / (n - 1) as f64).collect(),
            }
        };
        match self {
            RangeSpec::List(v) => v.clone(),
            RangeSpec::Log {
                log_start,
                log_end,
                count,
            } => spread(*log_start, *log_end, *count)
                .into_iter()
                .map(|e| 10f64.powf(e))
                .collect(),
            RangeSpec::Linear { start, end, count } => spread(*start, *end, *count),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsConfig {
    pub a: f64,
    pub b: f64,
    pub chi: f64,
    pub tau: f64,
}

impl Default for ParamsConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            chi: 0.01,
            tau: 0.5,
        }
    }
}

impl ParamsConfig {
    pub fn model(&self) -> crate::Result<ModelParams> {
        ModelParams::new(self.a, self.b, self.chi, self.tau)
    }
}

/// Grid spacing and optional domain; missing ends use the solver defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub dx: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            x_min: None,
            x_max: None,
            dx: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_outer: f64,
    pub tol_inner: f64,
    pub k_max: usize,
    pub dt: f64,
    pub t_max: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol_outer: 1e-6,
            tol_inner: 1e-8,
            k_max: 200,
            dt: 0.1,
            t_max: 1e3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpeedsConfig {
    pub chi: RangeSpec,
}

impl Default for SpeedsConfig {
    fn default() -> Self {
        Self {
            chi: RangeSpec::Log {
                log_start: -1.0,
                log_end: -4.0,
                count: 4,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct WaveConfig {
    /// Speed; defaults to the speed whose wave number is midway between
    /// `mu**` and `mu*`.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// `scale * (a/b) * (1 + amplitude * xi)` with `xi` uniform in `[0, 1)`.
    Perturbed,
    /// `a/b` on `x <= 0`, zero elsewhere.
    Compact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub c: f64,
    pub t_end: f64,
    pub dt: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    pub initial: InitialData,
    pub scale: f64,
    pub amplitude: f64,
    pub snapshot_every: f64,
    /// Level used for front tracking.
    pub level: f64,
    /// Bound on `‖u - a/b‖ + ‖v - a/b‖` at the end of a stability run.
    pub stability_tol: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            t_end: 100.0,
            dt: 0.05,
            x_min: -50.0,
            x_max: 50.0,
            dx: 0.1,
            initial: InitialData::Perturbed,
            scale: 3.0,
            amplitude: 0.1,
            snapshot_every: 1.0,
            level: 1e-2,
            stability_tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Wave number; defaults to the midpoint of `(mu**, mu*)`.
    pub mu: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigConfig {
    pub a: f64,
    pub c: f64,
    /// Interval length; defaults to the construction for `lambda0`.
    pub length: Option<f64>,
    /// Target eigenvalue; defaults to the midpoint of the admissible range.
    pub lambda0: Option<f64>,
    pub n: usize,
    pub tol: f64,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            a: 1.0,
            c: 0.0,
            length: None,
            lambda0: None,
            n: 2000,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepTask {
    Speeds,
    Wave,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub task: SweepTask,
    pub chi: RangeSpec,
    pub tau: RangeSpec,
    /// Only used by the wave task; an empty list means the mid-window speed.
    pub c: RangeSpec,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            task: SweepTask::Speeds,
            chi: RangeSpec::Log {
                log_start: -1.0,
                log_end: -4.0,
                count: 4,
            },
            tau: RangeSpec::List(vec![0.5]),
            c: RangeSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

/// The whole experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub seed: u64,
    pub params: ParamsConfig,
    pub grid: GridConfig,
    pub solver: SolverConfig,
    pub speeds: SpeedsConfig,
    pub wave: WaveConfig,
    pub evolve: EvolveConfig,
    pub verify: VerifyConfig,
    pub eig: EigConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Speeds,
            seed: 42,
            params: ParamsConfig::default(),
            grid: GridConfig::default(),
            solver: SolverConfig::default(),
            speeds: SpeedsConfig::default(),
            wave: WaveConfig::default(),
            evolve: EvolveConfig::default(),
            verify: VerifyConfig::default(),
            eig: EigConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn field_err(field: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Field {
        field: field.to_string(),
        reason: reason.into(),
    }
}

fn positive(field: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(field_err(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Parse TOML text, then apply `KEY=VALUE` overrides with dotted keys.
    pub fn from_toml_with_overrides(text: &str, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut tree: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        for item in overrides {
            let (key, value) = item
                .split_once('=')
                .ok_or_else(|| ConfigError::Override(item.clone()))?;
            set_dotted(&mut tree, key.trim(), parse_scalar(value.trim()))?;
        }
        let cfg: ExperimentConfig = toml::Value::Table(tree)
            .try_into()
            .map_err(|e: toml::de::Error| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_with_overrides(&text, overrides)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.params;
        positive("params.a", p.a)?;
        positive("params.b", p.b)?;
        if !(p.chi >= 0.0) {
            return Err(field_err("params.chi", "must be nonnegative"));
        }
        if !(p.tau >= 0.0) {
            return Err(field_err("params.tau", "must be nonnegative"));
        }
        positive("grid.dx", self.grid.dx)?;
        if let (Some(lo), Some(hi)) = (self.grid.x_min, self.grid.x_max) {
            if !(lo < hi) {
                return Err(field_err("grid.x_max", "must exceed grid.x_min"));
            }
        }
        let s = &self.solver;
        positive("solver.tol_outer", s.tol_outer)?;
        positive("solver.tol_inner", s.tol_inner)?;
        positive("solver.dt", s.dt)?;
        positive("solver.t_max", s.t_max)?;
        if s.k_max == 0 {
            return Err(field_err("solver.k_max", "must be at least 1"));
        }
        let e = &self.evolve;
        positive("evolve.t_end", e.t_end)?;
        positive("evolve.dt", e.dt)?;
        positive("evolve.dx", e.dx)?;
        positive("evolve.snapshot_every", e.snapshot_every)?;
        positive("evolve.level", e.level)?;
        positive("evolve.stability_tol", e.stability_tol)?;
        if !(e.x_min < e.x_max) {
            return Err(field_err("evolve.x_max", "must exceed evolve.x_min"));
        }
        if !(e.amplitude >= 0.0) {
            return Err(field_err("evolve.amplitude", "must be nonnegative"));
        }
        positive("eig.a", self.eig.a)?;
        positive("eig.tol", self.eig.tol)?;
        if self.eig.n < 50 {
            return Err(field_err("eig.n", "must be at least 50"));
        }
        if let Some(l) = self.eig.length {
            positive("eig.length", l)?;
        }
        for (name, r) in [
            ("speeds.chi", &self.speeds.chi),
            ("sweep.chi", &self.sweep.chi),
            ("sweep.tau", &self.sweep.tau),
            ("sweep.c", &self.sweep.c),
        ] {
            if r.values().iter().any(|v| !v.is_finite()) {
                return Err(field_err(name, "values must be finite"));
            }
        }
        Ok(())
    }

    /// Canonical TOML text of the resolved configuration.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serialises")
    }
}

/// Boundary kind implied by the sign of the drift.
pub fn eig_boundary(c: f64) -> BoundaryKind {
    if c < 0.0 {
        BoundaryKind::NeumannDirichlet
    } else {
        BoundaryKind::DirichletDirichlet
    }
}

fn parse_scalar(raw: &str) -> toml::Value {
    // Reuse the TOML grammar for numbers, booleans, arrays and quoted strings;
    // anything else is taken as a bare string.
    let probe = format!("v = {raw}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn set_dotted(tree: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), ConfigError> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigError::Override(key.to_string()));
    }
    let mut cur = tree;
    for part in &parts[..parts.len() - 1] {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| field_err(key, format!("`{part}` is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

/// Documented defaults, written next to every run.
pub fn schema() -> String {
    let mut out = String::from(
        "# Configuration schema: every key below is optional; the values shown are the defaults.\n\
         # mode: speeds | wave | evolve | verify | eig | sweep\n\
         # Ranges accept a list [x, y, ...], {log_start, log_end, count} (powers of ten)\n\
         # or {start, end, count}.\n\
         # grid.x_min/x_max default to [-L, L] with L = max(40, 20/mu).\n\
         # wave.c and verify.mu default to the middle of the admissible wave-number window.\n\
         # eig.length and eig.lambda0 default to the explicit eigenfunction construction.\n\n",
    );
    out.push_str(&ExperimentConfig::default().to_toml());
    out
}
