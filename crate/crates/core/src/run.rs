//! Experiment orchestration behind the `chemowave` binary: dispatch by mode,
//! collect result rows and invariant checks, and write the run artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{eig_boundary, ExperimentConfig, InitialData, Mode, SweepTask};
use crate::envelope::{
    build_envelope, verify_sub, verify_sub_shifted, verify_super_constant, verify_super_phi, EnvelopeOptions, FieldPair,
};
use crate::error::Error;
use crate::field::verify_field_bounds;
use crate::grid::{Grid, Profile};
use crate::params::{self, ModelParams};
use crate::spectra::{self, BoundaryKind, EigenProblem};
use crate::wave::{self, EvolveOptions, WaveOptions};

/// Process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Pass = 0,
    InvariantFailure = 1,
    Usage = 2,
    NonConvergence = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn worst(self, other: ExitStatus) -> ExitStatus {
        let rank = |s: ExitStatus| match s {
            ExitStatus::Pass => 0,
            ExitStatus::InvariantFailure => 1,
            ExitStatus::NonConvergence => 2,
            ExitStatus::Usage => 3,
        };
        if rank(other) > rank(self) {
            other
        } else {
            self
        }
    }
}

/// Exit status a solver error maps to.
pub fn classify(err: &Error) -> ExitStatus {
    match err {
        Error::NoConvergence { .. } | Error::BudgetExceeded { .. } => ExitStatus::NonConvergence,
        Error::Divergence { .. } | Error::Singular(_) | Error::Fit(_) => ExitStatus::InvariantFailure,
        _ => ExitStatus::Usage,
    }
}

/// One invariant, tagged with the tolerance it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value <= tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }

    /// Passes when `value >= tolerance`.
    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value >= tolerance,
        }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            tolerance: 1.0,
            pass: ok,
        }
    }
}

/// Comma-separated results with a fixed column order per mode.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Everything a run produced, before it is written to disk.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct RunOutcome {
    pub table: Table,
    pub checks: Vec<Check>,
    pub profiles: Vec<(String, Profile)>,
    /// Solver failures, one message per failed record.
    pub failures: Vec<String>,
    pub status: Option<ExitStatus>,
}

impl RunOutcome {
    pub fn exit_status(&self) -> ExitStatus {
        let mut s = self.status.unwrap_or(ExitStatus::Pass);
        if self.checks.iter().any(|c| !c.pass) {
            s = s.worst(ExitStatus::InvariantFailure);
        }
        s
    }

    fn fail(&mut self, context: &str, err: &Error) {
        self.failures.push(format!("{context}: {err}"));
        let s = classify(err);
        self.status = Some(self.status.unwrap_or(ExitStatus::Pass).worst(s));
    }
}

pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x}")
    }
}

fn with_params(cfg: &ExperimentConfig, chi: f64, tau: f64) -> crate::Result<ModelParams> {
    ModelParams::new(cfg.params.a, cfg.params.b, chi, tau)
}

fn wave_options(cfg: &ExperimentConfig) -> WaveOptions {
    WaveOptions {
        tol_outer: cfg.solver.tol_outer,
        tol_inner: cfg.solver.tol_inner,
        k_max: cfg.solver.k_max,
        dt: cfg.solver.dt,
        t_max: cfg.solver.t_max,
        dx: cfg.grid.dx,
        ..WaveOptions::default()
    }
}

/// Wave number in the middle of `(mu**, mu*)`; without chemotaxis, the
/// middle of `(0, mu_tau)`.
fn mid_wave_number(p: &ModelParams) -> crate::Result<f64> {
    if p.chi == 0.0 {
        return Ok(0.5 * params::mu_max(p.a, p.tau)?);
    }
    let w = params::admissible_window(p)?;
    Ok(0.5 * (w.mu_star2 + w.mu_star))
}

fn wave_grid(cfg: &ExperimentConfig, mu: f64) -> crate::Result<Grid> {
    let default = wave::default_grid(mu, cfg.grid.dx)?;
    Grid::with_spacing(
        cfg.grid.x_min.unwrap_or(default.x_min),
        cfg.grid.x_max.unwrap_or(default.x_max),
        cfg.grid.dx,
    )
}

const SPEED_COLUMNS: &[&str] = &[
    "chi",
    "tau",
    "m_tau",
    "chi_star",
    "mu_tau",
    "mu_tilde_star2",
    "mu_star2",
    "mu_star",
    "c_star",
    "c_star2",
    "unbounded",
    "crossings",
    "sufficient_chi",
    "sufficient_chi_literal",
    "status",
];

fn speeds_row(p: &ModelParams) -> (Vec<String>, Vec<Check>, Option<Error>) {
    let tag = format!("chi={},tau={}", fmt(p.chi), fmt(p.tau));
    let (rb, rl) = match params::sufficient_chi(p) {
        Ok(r) => (fmt(r.bound), fmt(r.literal_bound)),
        Err(_) => ("nan".into(), "nan".into()),
    };
    match params::admissible_window(p) {
        Ok(w) => {
            let ordered = 0.0 <= w.mu_star2 && w.mu_star2 < w.mu_star && w.mu_star <= w.mu_tau;
            let speeds = 2.0 * p.a.sqrt() <= w.c_star * (1.0 + 1e-12) && w.c_star < w.c_star2;
            let row = vec![
                fmt(p.chi),
                fmt(p.tau),
                fmt(w.m_tau),
                fmt(w.chi_star),
                fmt(w.mu_tau),
                fmt(w.mu_tilde_star2),
                fmt(w.mu_star2),
                fmt(w.mu_star),
                fmt(w.c_star),
                fmt(w.c_star2),
                w.unbounded.to_string(),
                w.crossings.len().to_string(),
                rb,
                rl,
                if w.inconsistent { "inconsistent" } else { "ok" }.into(),
            ];
            let checks = vec![
                Check::flag(format!("window_ordering[{tag}]"), ordered),
                Check::flag(format!("speed_ordering[{tag}]"), speeds),
                Check::at_most(format!("chi_below_half_b[{tag}]"), w.chi_star, p.b / 2.0),
            ];
            (row, checks, None)
        }
        Err(e) => {
            let (m, cs) = match params::m_tau(p.a, p.tau) {
                Ok(m) => (fmt(m), fmt(p.b / (1.0 + m))),
                Err(_) => ("nan".into(), "nan".into()),
            };
            let mut row = vec![fmt(p.chi), fmt(p.tau), m, cs];
            row.extend(std::iter::repeat_n("nan".to_string(), 6));
            row.extend(["false".into(), "0".into(), rb, rl, format!("error: {e}")]);
            (row, Vec::new(), Some(e))
        }
    }
}

fn run_speeds(cfg: &ExperimentConfig) -> RunOutcome {
    let mut out = RunOutcome {
        table: Table::new(SPEED_COLUMNS),
        ..Default::default()
    };
    for chi in cfg.speeds.chi.values() {
        let p = match with_params(cfg, chi, cfg.params.tau) {
            Ok(p) => p,
            Err(e) => {
                out.fail(&format!("chi={chi}"), &e);
                continue;
            }
        };
        let (row, checks, err) = speeds_row(&p);
        out.table.rows.push(row);
        out.checks.extend(checks);
        if let Some(e) = err {
            out.failures.push(format!("chi={chi}: {e}"));
        }
    }
    out
}

const WAVE_COLUMNS: &[&str] = &[
    "chi",
    "tau",
    "c",
    "mu",
    "outer_iterations",
    "residual_norm",
    "residual_tolerance",
    "left_state",
    "decay_ratio",
    "decay_rate",
    "in_envelope",
    "inside_window",
    "status",
];

fn solve_wave(cfg: &ExperimentConfig, p: &ModelParams, c: Option<f64>) -> crate::Result<(wave::WaveProfile, f64)> {
    let c = match c {
        Some(c) => c,
        None => {
            let mu = mid_wave_number(p)?;
            mu + p.a / mu
        }
    };
    let mu = params::mu_from_speed(c, p)?;
    let grid = wave_grid(cfg, mu)?;
    let w = wave::fixed_point_wave(p, c, Some(grid), &wave_options(cfg))?;
    let rate = wave::decay_rate(&w.u, 0.25)?;
    Ok((w, rate))
}

fn wave_row(p: &ModelParams, c: Option<f64>, res: &crate::Result<(wave::WaveProfile, f64)>) -> Vec<String> {
    match res {
        Ok((w, rate)) => vec![
            fmt(p.chi),
            fmt(p.tau),
            fmt(w.c),
            fmt(w.mu),
            w.outer_iterations.to_string(),
            fmt(w.residual_norm),
            fmt(w.residual_tolerance),
            fmt(w.left_state),
            fmt(w.decay_ratio),
            fmt(*rate),
            w.in_envelope.to_string(),
            w.inside_window.map_or("n/a".into(), |b| b.to_string()),
            "ok".into(),
        ],
        Err(e) => {
            let mut row = vec![fmt(p.chi), fmt(p.tau), c.map_or("nan".into(), fmt)];
            row.extend(std::iter::repeat_n("nan".to_string(), 9));
            row.push(format!("error: {e}"));
            row
        }
    }
}

fn wave_checks(p: &ModelParams, w: &wave::WaveProfile, rate: f64) -> Vec<Check> {
    let steady = p.a / p.b;
    vec![
        Check::at_most("stationary_residual", w.residual_norm, w.residual_tolerance),
        Check::at_most("left_state_rel_error", (w.left_state / steady - 1.0).abs(), 0.01),
        Check::at_most("decay_rate_rel_error", (rate / w.mu - 1.0).abs(), 0.02),
        Check::at_most("decay_ratio_error", (w.decay_ratio - 1.0).abs(), 0.02),
        Check::flag("in_envelope", w.in_envelope),
    ]
}

fn run_wave(cfg: &ExperimentConfig) -> RunOutcome {
    let mut out = RunOutcome {
        table: Table::new(WAVE_COLUMNS),
        ..Default::default()
    };
    let p = match cfg.params.model() {
        Ok(p) => p,
        Err(e) => {
            out.fail("params", &e);
            return out;
        }
    };
    let res = solve_wave(cfg, &p, cfg.wave.c);
    out.table.rows.push(wave_row(&p, cfg.wave.c, &res));
    match res {
        Ok((w, rate)) => {
            out.checks = wave_checks(&p, &w, rate);
            out.profiles.push(("wave_u".into(), w.u));
            out.profiles.push(("wave_v".into(), w.v));
        }
        Err(e) => out.fail("wave", &e),
    }
    out
}

fn initial_data(cfg: &ExperimentConfig, p: &ModelParams) -> crate::Result<Profile> {
    let e = &cfg.evolve;
    let grid = Grid::with_spacing(e.x_min, e.x_max, e.dx)?;
    let steady = p.a / p.b;
    Ok(match e.initial {
        InitialData::Perturbed => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let values = (0..grid.n)
                .map(|_| e.scale * steady * (1.0 + e.amplitude * rng.gen::<f64>()))
                .collect();
            Profile { grid, values }
        }
        InitialData::Compact => Profile::from_fn(grid, |x| if x <= 0.0 { steady } else { 0.0 }),
    })
}

fn run_evolve(cfg: &ExperimentConfig) -> RunOutcome {
    let mut out = RunOutcome {
        table: Table::new(&["t", "sup_u", "deviation"]),
        ..Default::default()
    };
    let e = &cfg.evolve;
    let setup = cfg.params.model().and_then(|p| initial_data(cfg, &p).map(|u0| (p, u0)));
    let (p, u0) = match setup {
        Ok(s) => s,
        Err(err) => {
            out.fail("setup", &err);
            return out;
        }
    };
    let opts = EvolveOptions {
        t_end: e.t_end,
        dt: e.dt,
        snapshot_every: Some(e.snapshot_every),
        ..EvolveOptions::default()
    };
    let traj = match wave::evolve_coupled(&u0, &p, e.c, &opts) {
        Ok(t) => t,
        Err(err) => {
            out.fail("evolve", &err);
            return out;
        }
    };
    let stride = ((e.snapshot_every / e.dt).round() as usize).max(1);
    for k in (0..traj.times.len()).step_by(stride) {
        out.table
            .rows
            .push(vec![fmt(traj.times[k]), fmt(traj.sup_u[k]), fmt(traj.deviation[k])]);
    }
    if let Some(bound) = p.global_bound(u0.sup_norm(), e.c) {
        let worst = traj.sup_u.iter().copied().fold(0.0, f64::max);
        out.checks.push(Check::at_most("global_bound", worst, bound + 1e-3));
    }
    if p.stability_holds(e.c) && u0.min() > 0.0 {
        let last = *traj.deviation.last().expect("recorded");
        out.checks
            .push(Check::at_most("stability_deviation", last, e.stability_tol));
    }
    if e.initial == InitialData::Compact {
        match wave::front_speed(&traj, e.level) {
            Ok(f) => {
                let floor = 0.95 * 2.0 * p.a.sqrt();
                if e.c == 0.0 {
                    out.checks.push(Check::at_least("front_speed_floor", f.speed, floor));
                }
                out.checks.push(Check::flag("front_inside_domain", !f.truncated));
            }
            Err(err) => out.fail("front_speed", &err),
        }
    }
    out.profiles.push(("evolve_u_final".into(), traj.final_state.u.clone()));
    out.profiles.push(("evolve_v_final".into(), traj.final_state.v.clone()));
    out
}

fn run_verify(cfg: &ExperimentConfig) -> RunOutcome {
    let mut out = RunOutcome {
        table: Table::new(&["u_field", "check", "extreme", "tolerance", "pass"]),
        ..Default::default()
    };
    let setup = (|| {
        let p = cfg.params.model()?;
        let mu = match cfg.verify.mu {
            Some(mu) => mu,
            None => mid_wave_number(&p)?,
        };
        let grid = wave_grid(cfg, mu)?;
        let env = build_envelope(&p, mu, EnvelopeOptions::for_grid(&grid))?;
        Ok::<_, Error>((p, grid, env))
    })();
    let (p, grid, env) = match setup {
        Ok(s) => s,
        Err(e) => {
            out.fail("setup", &e);
            return out;
        }
    };
    let lower = env.u_minus_on(grid);
    let upper = env.u_plus_on(grid);
    let middle = lower.zip_map(&upper, |a, b| 0.5 * (a + b));
    for (name, u) in [("u_minus", &lower), ("midpoint", &middle), ("u_plus", &upper)] {
        let reports = [
            verify_super_constant(&env, u, &p),
            verify_super_phi(&env, u, &p),
            verify_sub(&env, u, &p),
            verify_sub_shifted(&env, u, &p).map(|s| s.report),
        ];
        for r in reports {
            match r {
                Ok(r) => {
                    out.table.rows.push(vec![
                        name.into(),
                        r.name.clone(),
                        fmt(r.extreme),
                        fmt(r.tolerance),
                        r.pass.to_string(),
                    ]);
                    out.checks.push(Check {
                        name: format!("{}[{name}]", r.name),
                        value: r.extreme,
                        tolerance: r.tolerance,
                        pass: r.pass,
                    });
                }
                Err(e) => out.fail(name, &e),
            }
        }
        match FieldPair::solve(u, p.tau, env.speed(), env.field_bc()) {
            Ok(f) => {
                let b = verify_field_bounds(u, &f.v, &f.vp, &env);
                out.table.rows.push(vec![
                    name.into(),
                    "field_bounds".into(),
                    fmt(b.worst()),
                    fmt(b.tolerance),
                    b.pass.to_string(),
                ]);
                out.checks
                    .push(Check::at_most(format!("field_bounds[{name}]"), b.worst(), b.tolerance));
            }
            Err(e) => out.fail(name, &e),
        }
    }
    out.profiles.push(("u_plus".into(), upper));
    out.profiles.push(("u_minus".into(), lower));
    out
}

fn run_eig(cfg: &ExperimentConfig) -> RunOutcome {
    let mut out = RunOutcome {
        table: Table::new(&[
            "bc",
            "a",
            "c",
            "length",
            "expected",
            "lambda",
            "lambda_time",
            "abs_error",
        ]),
        ..Default::default()
    };
    let e = &cfg.eig;
    let bc = eig_boundary(e.c);
    let setup = (|| -> crate::Result<(f64, f64)> {
        match bc {
            BoundaryKind::DirichletDirichlet => {
                let l0 = e.lambda0.unwrap_or((e.a - e.c * e.c / 4.0) / 2.0);
                let len = match e.length {
                    Some(l) => l,
                    None => spectra::dirichlet_length(e.a, e.c, l0)?,
                };
                let pi = std::f64::consts::PI;
                Ok((len, e.a - e.c * e.c / 4.0 - pi * pi / (len * len)))
            }
            BoundaryKind::NeumannDirichlet => {
                let l0 = e.lambda0.unwrap_or(0.5 * ((e.a - e.c * e.c / 4.0).max(0.0) + e.a));
                let nd = spectra::neumann_dirichlet_length(e.a, e.c, l0)?;
                match e.length {
                    Some(l) if (l - nd.length).abs() > 1e-12 => Err(Error::NotApplicable(
                        "no closed form for a Neumann-Dirichlet interval of arbitrary length".into(),
                    )),
                    _ => Ok((nd.length, l0)),
                }
            }
        }
    })();
    let (length, expected) = match setup {
        Ok(s) => s,
        Err(err) => {
            out.fail("eig", &err);
            return out;
        }
    };
    match spectra::principal_eigen(&EigenProblem::unperturbed(e.a, e.c, length, bc), e.n) {
        Ok(r) => {
            let err = (r.lambda - expected).abs();
            let bc_name = match bc {
                BoundaryKind::DirichletDirichlet => "dirichlet_dirichlet",
                BoundaryKind::NeumannDirichlet => "neumann_dirichlet",
            };
            out.table.rows.push(vec![
                bc_name.into(),
                fmt(e.a),
                fmt(e.c),
                fmt(length),
                fmt(expected),
                fmt(r.lambda),
                fmt(r.lambda_time),
                fmt(err),
            ]);
            out.checks.push(Check::at_most("closed_form_error", err, e.tol));
            out.checks
                .push(Check::at_most("time_growth_cross_check", r.cross_check, 1e-4));
            out.checks.push(Check::flag("eigenfunction_positive", r.positive));
            let grid = Grid::new(0.0, length, e.n).expect("valid eigen grid");
            out.profiles
                .push(("eigenfunction".into(), Profile { grid, values: r.phi }));
        }
        Err(err) => out.fail("eig", &err),
    }
    out
}

fn run_sweep(cfg: &ExperimentConfig, workers: Option<usize>) -> RunOutcome {
    let chis = cfg.sweep.chi.values();
    let taus = cfg.sweep.tau.values();
    let cs: Vec<Option<f64>> = match cfg.sweep.task {
        SweepTask::Speeds => vec![None],
        SweepTask::Wave => {
            let v = cfg.sweep.c.values();
            if v.is_empty() {
                vec![None]
            } else {
                v.into_iter().map(Some).collect()
            }
        }
    };
    let mut jobs = Vec::new();
    for &chi in &chis {
        for &tau in &taus {
            for &c in &cs {
                jobs.push((chi, tau, c));
            }
        }
    }
    let header = match cfg.sweep.task {
        SweepTask::Speeds => SPEED_COLUMNS,
        SweepTask::Wave => WAVE_COLUMNS,
    };
    let work = |&(chi, tau, c): &(f64, f64, Option<f64>)| -> (Vec<String>, Option<String>) {
        let p = match with_params(cfg, chi, tau) {
            Ok(p) => p,
            Err(e) => {
                let mut row = vec![fmt(chi), fmt(tau)];
                row.extend(std::iter::repeat_n("nan".to_string(), header.len() - 3));
                row.push(format!("error: {e}"));
                return (row, Some(e.to_string()));
            }
        };
        match cfg.sweep.task {
            SweepTask::Speeds => {
                let (row, _, err) = speeds_row(&p);
                (row, err.map(|e| e.to_string()))
            }
            SweepTask::Wave => {
                let res = solve_wave(cfg, &p, c);
                let err = res.as_ref().err().map(|e| e.to_string());
                (wave_row(&p, c, &res), err)
            }
        }
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.unwrap_or(0))
        .build()
        .expect("thread pool");
    // Indexed parallel collection keeps rows in job order.
    let results: Vec<(Vec<String>, Option<String>)> = pool.install(|| jobs.par_iter().map(work).collect());
    let mut out = RunOutcome {
        table: Table::new(header),
        ..Default::default()
    };
    for ((chi, tau, c), (row, err)) in jobs.iter().zip(results) {
        out.table.rows.push(row);
        if let Some(e) = err {
            out.failures.push(format!(
                "chi={},tau={},c={}: {e}",
                fmt(*chi),
                fmt(*tau),
                c.map_or("mid".into(), fmt)
            ));
        }
    }
    out.checks.push(Check::flag(
        "row_count",
        out.table.rows.len() == chis.len() * taus.len() * cs.len(),
    ));
    out
}

/// Compute everything for the configured mode without touching the disk.
pub fn execute(cfg: &ExperimentConfig, workers: Option<usize>) -> RunOutcome {
    match cfg.mode {
        Mode::Speeds => run_speeds(cfg),
        Mode::Wave => run_wave(cfg),
        Mode::Evolve => run_evolve(cfg),
        Mode::Verify => run_verify(cfg),
        Mode::Eig => run_eig(cfg),
        Mode::Sweep => run_sweep(cfg, workers),
    }
}

/// SHA-256 of the canonical configuration text.
pub fn config_hash(cfg: &ExperimentConfig) -> String {
    let digest = Sha256::digest(cfg.to_toml().as_bytes());
    digest.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()
}

/// Write manifest, results, checks, failures, schema and profiles into `dir`.
pub fn write_artifacts(
    cfg: &ExperimentConfig,
    outcome: &RunOutcome,
    dir: &Path,
    wall_time: f64,
) -> std::io::Result<String> {
    fs::create_dir_all(dir)?;
    let hash = config_hash(cfg);
    let status = outcome.exit_status();

    let mut manifest = toml::Table::new();
    manifest.insert("tool".into(), "chemowave".into());
    manifest.insert("version".into(), env!("CARGO_PKG_VERSION").into());
    manifest.insert("mode".into(), cfg.mode.name().into());
    manifest.insert("config_sha256".into(), hash.clone().into());
    manifest.insert("exit_status".into(), i64::from(status.code()).into());
    manifest.insert("rows".into(), (outcome.table.rows.len() as i64).into());
    manifest.insert(
        "failed_checks".into(),
        (outcome.checks.iter().filter(|c| !c.pass).count() as i64).into(),
    );
    manifest.insert("wall_time_s".into(), wall_time.into());
    let echo: toml::Table = toml::from_str(&cfg.to_toml()).expect("round trip");
    manifest.insert("config".into(), toml::Value::Table(echo));
    fs::write(
        dir.join("manifest.toml"),
        toml::to_string(&manifest).expect("manifest serialises"),
    )?;

    write_csv(&dir.join("results.csv"), &outcome.table.header, &outcome.table.rows)?;
    let check_rows: Vec<Vec<String>> = outcome
        .checks
        .iter()
        .map(|c| vec![c.name.clone(), fmt(c.value), fmt(c.tolerance), c.pass.to_string()])
        .collect();
    let check_header: Vec<String> = ["name", "value", "tolerance", "pass"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    write_csv(&dir.join("checks.csv"), &check_header, &check_rows)?;
    let mut failures = String::new();
    for f in &outcome.failures {
        failures.push_str(f);
        failures.push('\n');
    }
    fs::write(dir.join("failures.txt"), failures)?;
    fs::write(dir.join("schema.toml"), crate::config::schema())?;

    if !outcome.profiles.is_empty() {
        let pdir = dir.join("profiles");
        fs::create_dir_all(&pdir)?;
        for (name, prof) in &outcome.profiles {
            let mut text = format!("# manifest {hash}\n# x {name}\n");
            for (i, v) in prof.values.iter().enumerate() {
                let _ = writeln!(text, "{} {}", fmt(prof.x(i)), fmt(*v));
            }
            fs::write(pdir.join(format!("{name}.dat")), text)?;
        }
    }
    Ok(hash)
}

/// Execute and write artifacts; returns the exit status.
pub fn run(cfg: &ExperimentConfig, dir: &Path, workers: Option<usize>) -> std::io::Result<ExitStatus> {
    let start = Instant::now();
    let outcome = execute(cfg, workers);
    let elapsed = start.elapsed().as_secs_f64();
    let hash = write_artifacts(cfg, &outcome, dir, elapsed)?;
    let status = outcome.exit_status();
    info!(
        "mode {} finished in {elapsed:.2}s: {} rows, {} checks ({} failed), manifest {hash}",
        cfg.mode.name(),
        outcome.table.rows.len(),
        outcome.checks.len(),
        outcome.checks.iter().filter(|c| !c.pass).count()
    );
    Ok(status)
}
