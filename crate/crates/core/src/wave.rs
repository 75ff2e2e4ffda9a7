//! Parabolic evolution with a frozen chemical field, its long-time limit, the
//! outer fixed point producing a traveling-wave profile, the fully coupled
//! evolution, and front diagnostics.
//!
//! All time stepping uses one linearly implicit scheme: diffusion and drift
//! implicit (centered, switched to upwind at nodes whose cell Péclet number
//! reaches 1), the growth part of the reaction explicit and the damping part
//! implicit. The system matrix is then an M-matrix, so nonnegative data stay
//! nonnegative for every step size.

use log::{debug, warn};
use serde::Serialize;

use crate::envelope::{build_envelope, membership_within, residual, Envelope, EnvelopeOptions, FieldPair, Stencil};
use crate::error::{domain, Error, Result};
use crate::field::{derivative_into, FieldBc, FieldSolver};
use crate::grid::{Grid, Profile};
use crate::params::{self, ModelParams};
use crate::tridiag::Tridiagonal;

/// Closure at `x_max`; the left end is always homogeneous Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RightBc {
    Neumann,
    Dirichlet(f64),
}

/// Work arrays for [`implicit_step`].
#[derive(Debug, Clone)]
struct StepWork {
    matrix: Tridiagonal,
    rhs: Vec<f64>,
    out: Vec<f64>,
    scratch: Vec<f64>,
}

impl StepWork {
    fn new(n: usize) -> Self {
        Self {
            matrix: Tridiagonal::zeros(n),
            rhs: vec![0.0; n],
            out: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }
}

/// One step of `U_t = U'' + (c - chi V')U' + (a - chi(V - tau c V') - (b - chi)U)U`
/// with `V`, `V'` given.
#[allow(clippy::too_many_arguments)]
fn implicit_step(
    u: &mut [f64],
    v: &[f64],
    vp: &[f64],
    p: &ModelParams,
    c: f64,
    dt: f64,
    h: f64,
    right: RightBc,
    work: &mut StepWork,
) -> Result<()> {
    let n = u.len();
    let k = p.b - p.chi;
    let (k_imp, k_exp) = (k.max(0.0), (-k).max(0.0));
    let inv_h2 = 1.0 / (h * h);
    let m = &mut work.matrix;
    for i in 0..n {
        let beta = c - p.chi * vp[i];
        let (lo, up) = if beta.abs() * h < 2.0 {
            (inv_h2 - beta / (2.0 * h), inv_h2 + beta / (2.0 * h))
        } else if beta > 0.0 {
            (inv_h2, inv_h2 + beta / h)
        } else {
            (inv_h2 - beta / h, inv_h2)
        };
        let r = p.a - p.chi * (v[i] - p.tau * c * vp[i]);
        let w = u[i];
        m.diag[i] = 1.0 / dt + lo + up + (-r).max(0.0) + k_imp * w;
        m.lower[i] = -lo;
        m.upper[i] = -up;
        work.rhs[i] = w * (1.0 / dt + r.max(0.0) + k_exp * w);
        if i == 0 {
            m.upper[0] = -(lo + up);
        }
        if i == n - 1 {
            m.lower[i] = -(lo + up);
        }
    }
    if let RightBc::Dirichlet(g) = right {
        m.lower[n - 1] = 0.0;
        m.diag[n - 1] = 1.0;
        work.rhs[n - 1] = g;
    }
    m.solve_into(&work.rhs, &mut work.out, &mut work.scratch)?;
    for (dst, &src) in u.iter_mut().zip(&work.out) {
        // Round-off can leave -1e-300 style values; the scheme is positive.
        *dst = src.max(0.0);
    }
    Ok(())
}

/// Evolve `U` from `u0` to `t_end` with the field frozen at `V(·; u_frozen)`.
///
/// The right end is pinned to the initial value `u0(x_max)`, which for the
/// envelope data `U⁺` is `U⁺(x_max)`.
pub fn evolve_frozen(
    u_frozen: &Profile,
    u0: &Profile,
    p: &ModelParams,
    c: f64,
    t_end: f64,
    dt: f64,
    field_bc: FieldBc,
) -> Result<Profile> {
    check_step(dt, t_end)?;
    let field = FieldPair::solve(u_frozen, p.tau, c, field_bc)?;
    let right = RightBc::Dirichlet(*u0.values.last().expect("non-empty profile"));
    let mut u = u0.values.clone();
    let mut work = StepWork::new(u.len());
    let steps = (t_end / dt).round() as usize;
    for _ in 0..steps {
        implicit_step(
            &mut u,
            &field.v.values,
            &field.vp.values,
            p,
            c,
            dt,
            u0.dx(),
            right,
            &mut work,
        )?;
    }
    Profile::new(u0.grid, u)
}

fn check_step(dt: f64, t_end: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(domain(format!("time step must be positive, got {dt}")));
    }
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(domain(format!("end time must be nonnegative, got {t_end}")));
    }
    Ok(())
}

/// Settings for [`long_time_limit`] and [`fixed_point_wave`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveOptions {
    pub tol_outer: f64,
    pub tol_inner: f64,
    pub k_max: usize,
    pub dt: f64,
    pub t_max: f64,
    /// Spacing between convergence checks of the inner evolution.
    pub checkpoint: f64,
    /// Grid spacing used when no grid is supplied.
    pub dx: f64,
    /// Requested envelope cap.
    pub c0: Option<f64>,
}

impl Default for WaveOptions {
    fn default() -> Self {
        Self {
            tol_outer: 1e-6,
            tol_inner: 1e-8,
            k_max: 200,
            dt: 0.1,
            t_max: 1e3,
            checkpoint: 1.0,
            dx: 0.05,
            c0: None,
        }
    }
}

/// The inner limit together with the checks made along the way.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitResult {
    pub profile: Profile,
    pub t: f64,
    /// Sup-norm change over each checkpoint interval.
    pub changes: Vec<f64>,
    /// Largest increase between consecutive checkpoints (nonpositive for a
    /// monotone decrease).
    pub monotonicity_violation: f64,
    /// Largest excursion outside `[U⁻_δ, U⁺]` at the checkpoints.
    pub sandwich_violation: f64,
}

/// `U(·; u) = lim_{t→∞} U(·, t; U⁺)` for the field frozen at `u`.
pub fn long_time_limit(u_field: &Profile, env: &Envelope, p: &ModelParams, opts: &WaveOptions) -> Result<LimitResult> {
    let field = FieldPair::solve(u_field, p.tau, env.speed(), env.field_bc())?;
    limit_with_field(&field, env, p, opts)
}

fn limit_with_field(field: &FieldPair, env: &Envelope, p: &ModelParams, opts: &WaveOptions) -> Result<LimitResult> {
    check_step(opts.dt, opts.t_max)?;
    let grid = field.v.grid;
    let c = env.speed();
    let mut u = env.u_plus_on(grid).values;
    let right = RightBc::Dirichlet(env.u_plus(grid.x_max));
    let lower: Vec<f64> = (0..grid.n).map(|i| env.u_minus_delta(grid.x(i))).collect();
    let upper: Vec<f64> = (0..grid.n).map(|i| env.u_plus(grid.x(i))).collect();
    let mut work = StepWork::new(grid.n);
    let per_check = ((opts.checkpoint / opts.dt).round() as usize).max(1);
    let mut t = 0.0;
    let mut prev = u.clone();
    let mut changes = Vec::new();
    let mut mono: f64 = f64::NEG_INFINITY;
    let mut sandwich: f64 = f64::NEG_INFINITY;
    loop {
        for _ in 0..per_check {
            implicit_step(
                &mut u,
                &field.v.values,
                &field.vp.values,
                p,
                c,
                opts.dt,
                grid.dx,
                right,
                &mut work,
            )?;
        }
        t += per_check as f64 * opts.dt;
        let mut change: f64 = 0.0;
        for i in 0..grid.n {
            let diff = u[i] - prev[i];
            change = change.max(diff.abs());
            mono = mono.max(diff);
            sandwich = sandwich.max(lower[i] - u[i]).max(u[i] - upper[i]);
        }
        changes.push(change);
        std::mem::swap(&mut prev, &mut u);
        u.copy_from_slice(&prev);
        if change < opts.tol_inner {
            break;
        }
        if t >= opts.t_max {
            return Err(Error::BudgetExceeded { t, change, last: u });
        }
    }
    Ok(LimitResult {
        profile: Profile::new(grid, u)?,
        t,
        changes,
        monotonicity_violation: mono,
        sandwich_violation: sandwich,
    })
}

/// A computed traveling-wave profile and its diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub u: Profile,
    pub v: Profile,
    pub c: f64,
    pub mu: f64,
    /// Sup-norm of `ℒU` (five-point stencil) away from the two end cells.
    pub residual_norm: f64,
    /// `50 dx^2 (1 + C0^2)`.
    pub residual_tolerance: f64,
    /// Mean of `U` over the leftmost 5% of the grid.
    pub left_state: f64,
    /// Median of `U e^{mu x}` over the window used by [`decay_rate`].
    pub decay_ratio: f64,
    pub outer_iterations: usize,
    /// `sup |u_{k+1} - u_k|` per outer iteration.
    pub history: Vec<f64>,
    pub in_envelope: bool,
    /// Whether `c` lies in the computed window `(c*, c**)`; `None` without
    /// chemotaxis.
    pub inside_window: Option<bool>,
    pub envelope: Envelope,
}

/// Default truncated domain `[-L, L]`, `L = max(40, 20/mu)`.
pub fn default_grid(mu: f64, dx: f64) -> Result<Grid> {
    let l = 40f64.max(20.0 / mu);
    Grid::with_spacing(-l, l, dx)
}

/// Picard iteration `u_{k+1} = U(·; u_k)` from `u_0 = U⁺`.
pub fn fixed_point_wave(p: &ModelParams, c: f64, grid: Option<Grid>, opts: &WaveOptions) -> Result<WaveProfile> {
    p.validate()?;
    let mu = params::mu_from_speed(c, p)?;
    let grid = match grid {
        Some(g) => g,
        None => default_grid(mu, opts.dx)?,
    };
    let env = build_envelope(
        p,
        mu,
        EnvelopeOptions {
            c0: opts.c0,
            ..EnvelopeOptions::for_grid(&grid)
        },
    )?;
    let inside_window = if p.chi > 0.0 {
        params::admissible_window(p).ok().map(|w| w.contains_speed(c))
    } else {
        None
    };
    if inside_window == Some(false) {
        warn!("speed {c} lies outside the computed window; result is outside the theory");
    }

    let mut u = env.u_plus_on(grid);
    let mut history = Vec::new();
    let mut converged = false;
    for k in 0..opts.k_max {
        let lim = long_time_limit(&u, &env, p, opts)?;
        let diff = lim.profile.sup_distance(&u);
        debug!("outer iteration {k}: change {diff:.3e}, inner time {}", lim.t);
        history.push(diff);
        u = lim.profile;
        if diff < opts.tol_outer {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: history.len(),
            history,
        });
    }

    let field = FieldPair::solve(&u, p.tau, c, env.field_bc())?;
    let r = residual(&u, &field, p, c, Stencil::Fourth);
    let residual_norm = r.values[2..r.len() - 2].iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let left_n = (grid.n / 20).max(1);
    let left_state = u.values[..left_n].iter().sum::<f64>() / left_n as f64;
    let (lo, hi) = decay_window(grid.n, 0.25)?;
    let mut ratios: Vec<f64> = (lo..hi).map(|i| u.values[i] * (mu * grid.x(i)).exp()).collect();
    ratios.sort_by(f64::total_cmp);
    let decay_ratio = ratios[ratios.len() / 2];
    Ok(WaveProfile {
        in_envelope: membership_within(&u, &env.with_delta(grid.dx), grid.dx * grid.dx),
        residual_tolerance: env.tolerance(grid.dx),
        v: field.v,
        u,
        c,
        mu,
        residual_norm,
        left_state,
        decay_ratio,
        outer_iterations: history.len(),
        history,
        inside_window,
        envelope: env,
    })
}

/// Index range of the rightmost `fraction` of the grid, less five end cells.
fn decay_window(n: usize, fraction: f64) -> Result<(usize, usize)> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Fit(format!(
            "window fraction must lie in (0, 1], got {fraction}"
        )));
    }
    let hi = n.saturating_sub(5);
    let width = ((n as f64) * fraction).floor() as usize;
    let lo = hi.saturating_sub(width);
    if hi < lo + 2 {
        return Err(Error::Fit("decay window has fewer than two points".into()));
    }
    Ok((lo, hi))
}

/// Least-squares slope of `ln U` over the rightmost `window` fraction of the
/// grid (five end cells excluded), returned as a positive decay rate.
pub fn decay_rate(u: &Profile, window: f64) -> Result<f64> {
    let (lo, hi) = decay_window(u.len(), window)?;
    let pts: Vec<(f64, f64)> = (lo..hi)
        .map(|i| {
            let v = u.values[i];
            if v > 0.0 {
                Ok((u.x(i), v.ln()))
            } else {
                Err(Error::Fit(format!("non-positive value {v} at x = {}", u.x(i))))
            }
        })
        .collect::<Result<_>>()?;
    Ok(-least_squares_slope(&pts))
}

fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

/// Solution pair of the coupled system at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionState {
    pub u: Profile,
    pub v: Profile,
    pub t: f64,
    pub dt: f64,
}

/// Settings for [`evolve_coupled`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub t_end: f64,
    pub dt: f64,
    pub field_bc: FieldBc,
    pub right: RightBc,
    /// Interval between stored profile snapshots; `None` stores none.
    pub snapshot_every: Option<f64>,
    /// Sup-norm above which the run is declared divergent.
    pub blow_up: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            dt: 0.05,
            field_bc: FieldBc::neumann(),
            right: RightBc::Neumann,
            snapshot_every: None,
            blow_up: 1e6,
        }
    }
}

/// Recorded history of a coupled run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    /// Times of the per-step records, starting with `t = 0`.
    pub times: Vec<f64>,
    pub sup_u: Vec<f64>,
    /// `‖u - a/b‖∞ + ‖v - a/b‖∞`.
    pub deviation: Vec<f64>,
    pub snapshots: Vec<(f64, Profile)>,
    pub final_state: EvolutionState,
    pub c: f64,
}

/// The coupled system in the frame moving with speed `c`: the chemical field
/// is re-solved from the current `u` before every step.
pub fn evolve_coupled(u0: &Profile, p: &ModelParams, c: f64, opts: &EvolveOptions) -> Result<Trajectory> {
    p.validate()?;
    check_step(opts.dt, opts.t_end)?;
    if u0.min() < 0.0 {
        return Err(domain("initial density must be nonnegative"));
    }
    let grid = u0.grid;
    let n = grid.n;
    let steady = p.a / p.b;
    let mut solver = FieldSolver::new(n, grid.dx, p.tau, c, opts.field_bc);
    let mut u = u0.values.clone();
    let mut v = vec![0.0; n];
    let mut vp = vec![0.0; n];
    let mut work = StepWork::new(n);
    let steps = (opts.t_end / opts.dt).round() as usize;
    let snap_stride = opts.snapshot_every.map(|s| ((s / opts.dt).round() as usize).max(1));

    let mut times = Vec::with_capacity(steps + 1);
    let mut sup_u = Vec::with_capacity(steps + 1);
    let mut deviation = Vec::with_capacity(steps + 1);
    let mut snapshots = Vec::new();
    let record = |t: f64, u: &[f64], v: &[f64], times: &mut Vec<f64>, sup_u: &mut Vec<f64>, dev: &mut Vec<f64>| {
        times.push(t);
        sup_u.push(u.iter().fold(0.0f64, |m, x| m.max(x.abs())));
        let du = u.iter().fold(0.0f64, |m, x| m.max((x - steady).abs()));
        let dv = v.iter().fold(0.0f64, |m, x| m.max((x - steady).abs()));
        dev.push(du + dv);
    };

    solver.solve_into(&u, &mut v)?;
    record(0.0, &u, &v, &mut times, &mut sup_u, &mut deviation);
    if snap_stride.is_some() {
        snapshots.push((0.0, Profile::new(grid, u.clone())?));
    }
    let mut t = 0.0;
    for step in 1..=steps {
        derivative_into(&v, grid.dx, &mut vp);
        implicit_step(&mut u, &v, &vp, p, c, opts.dt, grid.dx, opts.right, &mut work)?;
        t = step as f64 * opts.dt;
        solver.solve_into(&u, &mut v)?;
        record(t, &u, &v, &mut times, &mut sup_u, &mut deviation);
        let norm = *sup_u.last().expect("recorded");
        if !(norm <= opts.blow_up) {
            return Err(Error::Divergence { t, norm });
        }
        if let Some(stride) = snap_stride {
            if step % stride == 0 {
                snapshots.push((t, Profile::new(grid, u.clone())?));
            }
        }
    }
    Ok(Trajectory {
        times,
        sup_u,
        deviation,
        snapshots,
        final_state: EvolutionState {
            u: Profile::new(grid, u)?,
            v: Profile::new(grid, v)?,
            t,
            dt: opts.dt,
        },
        c,
    })
}

/// Result of [`front_speed`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontSpeed {
    pub speed: f64,
    /// Level-set positions `(t, x_f(t))` of all snapshots.
    pub positions: Vec<(f64, f64)>,
    /// Set when the front came within 5% of the domain end.
    pub truncated: bool,
}

/// Rightmost point where `u` reaches `level`, interpolated between nodes.
fn level_position(u: &Profile, level: f64) -> Option<f64> {
    let i = (0..u.len()).rev().find(|&i| u.values[i] >= level)?;
    if i + 1 == u.len() {
        return Some(u.grid.x_max);
    }
    let (a, b) = (u.values[i], u.values[i + 1]);
    let w = (a - level) / (a - b);
    Some(u.x(i) + w * u.dx())
}

/// Least-squares slope of `x_f(t) = max{x : u(x, t) >= level}` over the
/// second half of the recorded snapshots.
pub fn front_speed(traj: &Trajectory, level: f64) -> Result<FrontSpeed> {
    let positions: Vec<(f64, f64)> = traj
        .snapshots
        .iter()
        .filter_map(|(t, u)| level_position(u, level).map(|x| (*t, x)))
        .collect();
    if positions.len() < 4 {
        return Err(Error::Fit(format!(
            "front at level {level} found in only {} snapshots",
            positions.len()
        )));
    }
    let t_end = positions.last().expect("non-empty").0;
    let t_start = positions[0].0;
    let half = 0.5 * (t_start + t_end);
    let late: Vec<(f64, f64)> = positions.iter().copied().filter(|p| p.0 >= half).collect();
    if late.len() < 2 {
        return Err(Error::Fit("too few snapshots in the second half".into()));
    }
    let grid = traj.final_state.u.grid;
    let limit = grid.x_max - 0.05 * grid.length();
    let truncated = positions.iter().any(|p| p.1 >= limit);
    if truncated {
        warn!("front at level {level} reached the end of the domain; speed is unreliable");
    }
    Ok(FrontSpeed {
        speed: least_squares_slope(&late),
        positions,
        truncated,
    })
}
