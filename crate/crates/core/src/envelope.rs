//! The order interval `[U⁻, U⁺]` in which the wave profile is sought, the
//! operator `ℒ` of the frozen-field equation, and numerical checks of the
//! super/sub-solution inequalities.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::{derivative_into, solve_field_ode, FieldBc};
use crate::grid::{Grid, Profile};
use crate::params::{self, ModelParams};

/// Constants of the envelope for one wave number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeConstants {
    pub mu: f64,
    pub c_mu: f64,
    /// `1 + tau mu c_mu - mu^2`.
    pub big_d: f64,
    /// Cap, at least `c_tilde0`.
    pub c0: f64,
    /// `a / (b - chi (1 + tau c_mu / 2))`.
    pub c_tilde0: f64,
    pub mu_tilde: f64,
    /// Upper end of the interval `mu_tilde` is chosen from.
    pub mu_tilde_limit: f64,
    pub d: f64,
    pub d0: f64,
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    /// Zero of `U⁻`: `ln d / (mu_tilde - mu)`.
    pub a_lower: f64,
    /// Maximiser of `U⁻`: `ln(d mu_tilde / mu) / (mu_tilde - mu)`.
    pub a_upper: f64,
    pub delta: f64,
    pub x_delta: f64,
}

/// Overrides for [`build_envelope`].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EnvelopeOptions {
    /// Requested cap; raised to `c_tilde0` if smaller.
    pub c0: Option<f64>,
    /// Gap coefficient; must be at least `d0`.
    pub d: Option<f64>,
    /// Shift of the flat sub-solution; defaults to `0.02`, callers on a grid
    /// normally pass one cell.
    pub delta: Option<f64>,
}

impl EnvelopeOptions {
    pub fn for_grid(grid: &Grid) -> Self {
        Self {
            delta: Some(grid.dx),
            ..Self::default()
        }
    }
}

/// `φ = e^{-mu x}`, `U⁺ = min(C0, φ)`, `V⁺ = min(C0, φ/D)`,
/// `U⁻ = max(0, φ - d e^{-mu_tilde x})` and the flat-extended `U⁻_δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub params: ModelParams,
    pub constants: EnvelopeConstants,
}

pub fn build_envelope(p: &ModelParams, mu: f64, opts: EnvelopeOptions) -> Result<Envelope> {
    p.validate()?;
    if !params::is_admissible(mu, p) {
        return Err(Error::Inadmissible(format!(
            "wave number {mu} violates the admissibility constraints for {p:?}"
        )));
    }
    let (a, b, chi, tau) = (p.a, p.b, p.chi, p.tau);
    let c = mu + a / mu;
    let big_d = 1.0 + tau * mu * c - mu * mu;
    let sd = big_d.sqrt();
    let mu_tau = params::mu_max(a, tau)?;
    let limit = mu_tau.min(2.0 * mu).min(mu + 1.0 / (mu + sd));
    let mu_tilde = 0.5 * (mu + limit);

    let c_tilde0 = a / (b - chi * (1.0 + tau * c / 2.0));
    let c0 = opts.c0.map_or(c_tilde0, |k| k.max(c_tilde0));

    let a0 = (mu_tilde - mu) * (a - mu * mu_tilde) / mu;
    let g2 = (mu + tau * c) / sd + mu * (mu + tau * c) / big_d;
    let a1 = chi * g2 + chi / big_d + (b - chi);
    let a2 = (b - chi) + chi / big_d - chi * ((tau * c + mu_tilde) / sd + mu * (tau * c + mu_tilde) / big_d);
    let d0 = 1f64.max(a1 / a0).max(c0.powf((mu - mu_tilde) / mu));
    let d = match opts.d {
        Some(d) if d >= d0 => d,
        Some(d) => {
            return Err(Error::Inadmissible(format!(
                "gap coefficient {d} is below the minimal value {d0}"
            )))
        }
        None => d0.max(1.0 + 1e-6) * (1.0 + 1e-3),
    };
    let gap = mu_tilde - mu;
    let a_lower = d.ln() / gap;
    let a_upper = ((d * mu_tilde).ln() - mu.ln()) / gap;
    let delta = opts.delta.unwrap_or(0.02);
    Ok(Envelope {
        params: *p,
        constants: EnvelopeConstants {
            mu,
            c_mu: c,
            big_d,
            c0,
            c_tilde0,
            mu_tilde,
            mu_tilde_limit: limit,
            d,
            d0,
            a0,
            a1,
            a2,
            a_lower,
            a_upper,
            delta,
            x_delta: a_lower + delta,
        },
    })
}

impl Envelope {
    pub fn mu(&self) -> f64 {
        self.constants.mu
    }

    pub fn speed(&self) -> f64 {
        self.constants.c_mu
    }

    pub fn phi(&self, x: f64) -> f64 {
        (-self.constants.mu * x).exp()
    }

    pub fn u_plus(&self, x: f64) -> f64 {
        self.constants.c0.min(self.phi(x))
    }

    pub fn v_plus(&self, x: f64) -> f64 {
        self.constants.c0.min(self.phi(x) / self.constants.big_d)
    }

    pub fn u_minus(&self, x: f64) -> f64 {
        let k = &self.constants;
        if x <= k.a_lower {
            return 0.0;
        }
        ((-k.mu * x).exp() - k.d * (-k.mu_tilde * x).exp()).max(0.0)
    }

    /// `U⁻` held at its value at `x_delta` to the left of `x_delta`.
    pub fn u_minus_delta(&self, x: f64) -> f64 {
        self.u_minus(x.max(self.constants.x_delta))
    }

    /// The same envelope with another shift `delta`.
    pub fn with_delta(mut self, delta: f64) -> Self {
        self.constants.delta = delta;
        self.constants.x_delta = self.constants.a_lower + delta;
        self
    }

    pub fn sample(&self, grid: Grid, f: impl Fn(&Self, f64) -> f64) -> Profile {
        Profile::from_fn(grid, |x| f(self, x))
    }

    pub fn u_plus_on(&self, grid: Grid) -> Profile {
        self.sample(grid, Self::u_plus)
    }

    pub fn u_minus_on(&self, grid: Grid) -> Profile {
        self.sample(grid, Self::u_minus)
    }

    pub fn phi_on(&self, grid: Grid) -> Profile {
        self.sample(grid, Self::phi)
    }

    /// Field boundary closure matching the envelope's decay.
    pub fn field_bc(&self) -> FieldBc {
        FieldBc::decaying(self.constants.mu)
    }

    /// Default verifier tolerance `50 dx^2 (1 + C0^2)`.
    pub fn tolerance(&self, dx: f64) -> f64 {
        50.0 * dx * dx * (1.0 + self.constants.c0 * self.constants.c0)
    }
}

/// Whether `U⁻ <= u <= U⁺` at every grid point, to within `1e-10`.
pub fn membership(u: &Profile, env: &Envelope) -> bool {
    membership_within(u, env, 0.0)
}

/// Like [`membership`], with an extra slack of `rel * U⁺(x)` at each point.
///
/// A discrete solution differs from the exact one by a relative
/// discretisation error, which matters in the far tail where both bounds are
/// tiny; `rel = dx^2` is the natural scale there.
pub fn membership_within(u: &Profile, env: &Envelope, rel: f64) -> bool {
    (0..u.len()).all(|i| {
        let x = u.x(i);
        let v = u.values[i];
        let slack = 1e-10 + rel * env.u_plus(x);
        v >= env.u_minus(x) - slack && v <= env.u_plus(x) + slack
    })
}

/// `V(·; u)` and `V'(·; u)` on the grid of `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub v: Profile,
    pub vp: Profile,
}

impl FieldPair {
    pub fn solve(u: &Profile, tau: f64, c: f64, bc: FieldBc) -> Result<Self> {
        let v = solve_field_ode(u, tau, c, bc)?;
        let mut d = vec![0.0; v.len()];
        derivative_into(&v.values, v.dx(), &mut d);
        let vp = Profile {
            grid: v.grid,
            values: d,
        };
        Ok(Self { v, vp })
    }
}

/// Difference stencil used for `U'` and `U''` inside [`residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Stencil {
    /// Three-point centered differences.
    #[default]
    Second,
    /// Five-point centered differences where they fit.
    Fourth,
}

/// First and second derivatives of `u` with the given interior stencil and
/// one-sided second-order formulas at the ends.
pub(crate) fn derivatives(u: &[f64], h: f64, stencil: Stencil) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    let h2 = h * h;
    if n >= 4 {
        d1[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * h);
        d2[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) / h2;
        d1[n - 1] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) / (2.0 * h);
        d2[n - 1] = (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) / h2;
    }
    for i in 1..n - 1 {
        let wide = stencil == Stencil::Fourth && i >= 2 && i + 2 < n;
        if wide {
            d1[i] = (-u[i + 2] + 8.0 * u[i + 1] - 8.0 * u[i - 1] + u[i - 2]) / (12.0 * h);
            d2[i] = (-u[i + 2] + 16.0 * u[i + 1] - 30.0 * u[i] + 16.0 * u[i - 1] - u[i - 2]) / (12.0 * h2);
        } else {
            d1[i] = (u[i + 1] - u[i - 1]) / (2.0 * h);
            d2[i] = (u[i + 1] - 2.0 * u[i] + u[i - 1]) / h2;
        }
    }
    (d1, d2)
}

/// `ℒU = U'' + (c - chi V')U' + (a - chi (V - tau c V') - (b - chi) U) U`.
pub fn residual(u: &Profile, field: &FieldPair, p: &ModelParams, c: f64, stencil: Stencil) -> Profile {
    let (d1, d2) = derivatives(&u.values, u.dx(), stencil);
    let values = (0..u.len())
        .map(|i| {
            let (v, vp, w) = (field.v.values[i], field.vp.values[i], u.values[i]);
            d2[i] + (c - p.chi * vp) * d1[i] + (p.a - p.chi * (v - p.tau * c * vp) - (p.b - p.chi) * w) * w
        })
        .collect();
    Profile { grid: u.grid, values }
}

/// Outcome of one super- or sub-solution check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifierReport {
    pub name: String,
    /// Largest residual for a super-solution, smallest for a sub-solution.
    pub extreme: f64,
    pub location: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Analytic coefficient of the bound, where one exists.
    pub bound: Option<f64>,
}

fn super_report(
    name: &str,
    r: &Profile,
    range: std::ops::Range<usize>,
    tol: f64,
    bound: Option<f64>,
) -> VerifierReport {
    let (mut extreme, mut location) = (f64::NEG_INFINITY, f64::NAN);
    for i in range {
        if r.values[i] > extreme {
            extreme = r.values[i];
            location = r.x(i);
        }
    }
    VerifierReport {
        name: name.to_string(),
        extreme,
        location,
        tolerance: tol,
        pass: extreme <= tol,
        bound,
    }
}

fn sub_report(name: &str, r: &Profile, range: std::ops::Range<usize>, tol: f64, bound: Option<f64>) -> VerifierReport {
    let (mut extreme, mut location) = (f64::INFINITY, f64::NAN);
    for i in range {
        if r.values[i] < extreme {
            extreme = r.values[i];
            location = r.x(i);
        }
    }
    VerifierReport {
        name: name.to_string(),
        extreme,
        location,
        tolerance: tol,
        pass: extreme >= -tol,
        bound,
    }
}

fn env_field(env: &Envelope, u_field: &Profile) -> Result<FieldPair> {
    FieldPair::solve(u_field, env.params.tau, env.speed(), env.field_bc())
}

/// The constant `C0` as a super-solution.
pub fn verify_super_constant(env: &Envelope, u_field: &Profile, p: &ModelParams) -> Result<VerifierReport> {
    let field = env_field(env, u_field)?;
    let u = Profile::constant(u_field.grid, env.constants.c0);
    let r = residual(&u, &field, p, env.speed(), Stencil::Second);
    let tol = env.tolerance(u.dx());
    Ok(super_report("super_constant", &r, 0..r.len(), tol, None))
}

/// `φ = e^{-mu x}` as a super-solution; `bound` is `chi (G2 - (b - chi)/chi)`,
/// the coefficient of `φ^2` in the analytic upper bound.
pub fn verify_super_phi(env: &Envelope, u_field: &Profile, p: &ModelParams) -> Result<VerifierReport> {
    let field = env_field(env, u_field)?;
    let u = env.phi_on(u_field.grid);
    let r = residual(&u, &field, p, env.speed(), Stencil::Second);
    let tol = env.tolerance(u.dx());
    let bound = params::constraint_values(env.mu(), p)
        .ok()
        .map(|g| p.chi * g.g2 - (p.b - p.chi));
    // End points use one-sided stencils that do not see the far field.
    Ok(super_report("super_phi", &r, 1..r.len() - 1, tol, bound))
}

/// `U⁻` as a sub-solution on `(a_lower + 2 dx, x_max]`.
pub fn verify_sub(env: &Envelope, u_field: &Profile, p: &ModelParams) -> Result<VerifierReport> {
    let field = env_field(env, u_field)?;
    let grid = u_field.grid;
    let u = env.u_minus_on(grid);
    let r = residual(&u, &field, p, env.speed(), Stencil::Second);
    let tol = env.tolerance(grid.dx);
    let start = (0..grid.n)
        .find(|&i| grid.x(i) > env.constants.a_lower + 2.0 * grid.dx)
        .unwrap_or(grid.n);
    Ok(sub_report("sub", &r, start..grid.n, tol, None))
}

/// Report for the flat sub-solution `U⁻(x_delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftedSubReport {
    pub report: VerifierReport,
    /// `a - chi (1 + tau c/2) C̃0`.
    pub scalar: f64,
    /// The same quantity in the form `a (b - 2 chi k)/(b - chi k)`,
    /// `k = 1 + tau c / 2`.
    pub scalar_closed_form: f64,
    /// The constant `U⁻(x_delta)`.
    pub level: f64,
}

/// The constant `U⁻(x_delta)` (built with cap `C̃0`) as a sub-solution on the
/// whole grid.
pub fn verify_sub_shifted(env: &Envelope, u_field: &Profile, p: &ModelParams) -> Result<ShiftedSubReport> {
    let field = env_field(env, u_field)?;
    let k = &env.constants;
    let level = env.u_minus(k.x_delta);
    let u = Profile::constant(u_field.grid, level);
    let r = residual(&u, &field, p, env.speed(), Stencil::Second);
    let tol = env.tolerance(u.dx());
    let kk = 1.0 + p.tau * k.c_mu / 2.0;
    let scalar = p.a - p.chi * kk * k.c_tilde0;
    let closed = p.a * (p.b - 2.0 * p.chi * kk) / (p.b - p.chi * kk);
    let mut report = sub_report("sub_shifted", &r, 0..r.len(), tol, Some(scalar));
    report.pass = report.pass && scalar > 0.0;
    Ok(ShiftedSubReport {
        report,
        scalar,
        scalar_closed_form: closed,
        level,
    })
}
