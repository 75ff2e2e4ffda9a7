//! The elliptic chemical equation `v'' + tau c v' - v = -u` on a truncated
//! line, solved either by finite differences or by quadrature of the
//! resolvent kernel.

use log::warn;
use rayon::prelude::*;
use serde::Serialize;

use crate::envelope::Envelope;
use crate::error::{domain, Result};
use crate::grid::Profile;
use crate::quadrature::GaussLaguerre;
use crate::tridiag::Tridiagonal;

/// Robin closures `v' = left_growth * v` at `x_min` and
/// `v' = -right_decay * v` at `x_max`.
///
/// `left_growth = 0` and `right_decay = None` are homogeneous Neumann.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct FieldBc {
    pub left_growth: f64,
    pub right_decay: Option<f64>,
}

impl FieldBc {
    pub fn neumann() -> Self {
        Self::default()
    }

    /// Neumann on the left, decay `e^{-mu x}` matched on the right.
    pub fn decaying(mu: f64) -> Self {
        Self {
            left_growth: 0.0,
            right_decay: Some(mu),
        }
    }
}

/// The tridiagonal matrix of `v'' + tau c v' - v` with ghost-point closures.
fn field_matrix(n: usize, h: f64, drift: f64, bc: FieldBc) -> Tridiagonal {
    // Upwind the drift only where the centered stencil would lose the
    // discrete maximum principle.
    let (lo, up) = if drift.abs() * h < 2.0 {
        (1.0 / (h * h) - drift / (2.0 * h), 1.0 / (h * h) + drift / (2.0 * h))
    } else if drift > 0.0 {
        (1.0 / (h * h), 1.0 / (h * h) + drift / h)
    } else {
        (1.0 / (h * h) - drift / h, 1.0 / (h * h))
    };
    let centre = -(lo + up) - 1.0;
    let mut m = Tridiagonal::zeros(n);
    for i in 0..n {
        m.lower[i] = lo;
        m.diag[i] = centre;
        m.upper[i] = up;
    }
    // v_{-1} = v_1 - 2 h g v_0
    m.diag[0] = centre - 2.0 * h * bc.left_growth * lo;
    m.upper[0] = up + lo;
    // v_n = v_{n-2} - 2 h mu v_{n-1}
    let s = -bc.right_decay.unwrap_or(0.0);
    m.lower[n - 1] = lo + up;
    m.diag[n - 1] = centre + 2.0 * h * s * up;
    m
}

/// Finite-difference solve of `v'' + tau c v' - v = -u`.
pub fn solve_field_ode(u: &Profile, tau: f64, c: f64, bc: FieldBc) -> Result<Profile> {
    let n = u.len();
    if n < 3 {
        return Err(domain("field solve needs at least 3 grid points"));
    }
    let m = field_matrix(n, u.dx(), tau * c, bc);
    let rhs: Vec<f64> = u.values.iter().map(|v| -v).collect();
    let values = m.solve(&rhs)?;
    Ok(Profile { grid: u.grid, values })
}

/// Reusable field solver for repeated solves on one grid.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    matrix: Tridiagonal,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
}

impl FieldSolver {
    pub fn new(n: usize, h: f64, tau: f64, c: f64, bc: FieldBc) -> Self {
        Self {
            matrix: field_matrix(n, h, tau * c, bc),
            rhs: vec![0.0; n],
            scratch: vec![0.0; n],
        }
    }

    pub fn solve_into(&mut self, u: &[f64], v: &mut [f64]) -> Result<()> {
        for (r, x) in self.rhs.iter_mut().zip(u) {
            *r = -x;
        }
        self.matrix.solve_into(&self.rhs, v, &mut self.scratch)
    }
}

/// Quadrature settings for [`solve_field_kernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KernelOptions {
    /// Nodes beyond this horizon are dropped; their weight is below
    /// `e^{-s_max}`.
    pub s_max: f64,
    pub quad_n: usize,
    /// Half-width of the Gaussian variable `y` in `z = x + 2 sqrt(s) y`.
    pub y_half_width: f64,
    /// Upper bound on the trapezoid step in `y`.
    pub max_dy: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            s_max: 40.0,
            quad_n: 64,
            y_half_width: 6.0,
            max_dy: 0.1,
        }
    }
}

/// Trapezoid nodes for `π^{-1/2} ∫ e^{-y^2} g(y) dy` over `[-w, w]`.
fn gaussian_trapezoid(half_width: f64, dy: f64) -> Vec<(f64, f64)> {
    let m = (half_width / dy).ceil() as i64;
    let h = half_width / m as f64;
    let norm = h / std::f64::consts::PI.sqrt();
    (-m..=m)
        .map(|k| {
            let y = k as f64 * h;
            let end = if k.abs() == m { 0.5 } else { 1.0 };
            (y, end * norm * (-y * y).exp())
        })
        .collect()
}

/// The kernel representation
/// `V(x) = ∫_0^∞ e^{-s} π^{-1/2} ∫ e^{-y^2} u(x + 2 sqrt(s) y + tau c s) dy ds`,
/// evaluated by Gauss–Laguerre in `s` and a trapezoid in `y`. Values of `u`
/// off the grid are continued by the endpoint values.
pub fn solve_field_kernel(u: &Profile, tau: f64, c: f64, opts: KernelOptions) -> Result<Profile> {
    if !(opts.s_max > 0.0) || opts.quad_n == 0 {
        return Err(domain("kernel quadrature needs s_max > 0 and at least one node"));
    }
    let tail = (-opts.s_max).exp();
    if tail > 1e-8 {
        warn!(
            "kernel quadrature horizon s_max = {} leaves a tail of {tail:.2e}",
            opts.s_max
        );
    }
    let rule = GaussLaguerre::new(opts.quad_n);
    let h = u.dx();
    // Per node: the weight, the shift, and the y-rule scaled by 2 sqrt(s).
    type Layer = (f64, f64, Vec<(f64, f64)>);
    let layers: Vec<Layer> = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(&s, &w)| s <= opts.s_max && w > 1e-300)
        .map(|(&s, &w)| {
            let spread = 2.0 * s.sqrt();
            let dy = opts.max_dy.min(0.5 * h / spread);
            (w, tau * c * s, {
                gaussian_trapezoid(opts.y_half_width, dy)
                    .into_iter()
                    .map(|(y, wy)| (spread * y, wy))
                    .collect()
            })
        })
        .collect();
    // Points are independent; the indexed collect keeps the output deterministic.
    let values = (0..u.len())
        .into_par_iter()
        .map(|i| {
            let x = u.x(i);
            layers
                .iter()
                .map(|(w, shift, ys)| {
                    let inner: f64 = ys.iter().map(|&(z, wy)| wy * u.interpolate(x + z + shift)).sum();
                    w * inner
                })
                .sum()
        })
        .collect();
    Ok(Profile { grid: u.grid, values })
}

/// Fourth-order centered differences in the interior, second-order at the
/// two points next to each end and one-sided second order at the ends.
pub fn field_derivative(v: &Profile) -> Profile {
    let mut out = vec![0.0; v.len()];
    derivative_into(&v.values, v.dx(), &mut out);
    Profile {
        grid: v.grid,
        values: out,
    }
}

pub(crate) fn derivative_into(v: &[f64], h: f64, out: &mut [f64]) {
    let n = v.len();
    debug_assert!(n >= 3);
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    out[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
    for i in 1..n - 1 {
        out[i] = if i >= 2 && i + 2 < n {
            (-v[i + 2] + 8.0 * v[i + 1] - 8.0 * v[i - 1] + v[i - 2]) / (12.0 * h)
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        };
    }
}

/// Largest violations of the pointwise field bounds for `u` in the envelope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldBoundsReport {
    /// `max(-V)`.
    pub negativity: f64,
    /// `max(V - V⁺)`.
    pub above_v_plus: f64,
    /// `max(|V'| - (1/sqrt(D) + mu/D) e^{-mu x})`.
    pub derivative_excess: f64,
    /// `max(‖V‖∞, ‖V'‖∞) - ‖u‖∞`.
    pub sup_excess: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl FieldBoundsReport {
    pub fn worst(&self) -> f64 {
        self.negativity
            .max(self.above_v_plus)
            .max(self.derivative_excess)
            .max(self.sup_excess)
    }
}

pub fn verify_field_bounds(u: &Profile, v: &Profile, vp: &Profile, env: &Envelope) -> FieldBoundsReport {
    let k = &env.constants;
    let slope = 1.0 / k.big_d.sqrt() + k.mu / k.big_d;
    let mut negativity = f64::NEG_INFINITY;
    let mut above = f64::NEG_INFINITY;
    let mut deriv = f64::NEG_INFINITY;
    for i in 0..v.len() {
        let x = v.x(i);
        negativity = negativity.max(-v.values[i]);
        above = above.max(v.values[i] - env.v_plus(x));
        deriv = deriv.max(vp.values[i].abs() - slope * env.phi(x));
    }
    let sup_excess = v.sup_norm().max(vp.sup_norm()) - u.sup_norm();
    let dx = v.dx();
    let tolerance = 10.0 * dx * dx + 1e-8;
    let mut report = FieldBoundsReport {
        negativity,
        above_v_plus: above,
        derivative_excess: deriv,
        sup_excess,
        tolerance,
        pass: false,
    };
    report.pass = report.worst() <= tolerance;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn constant_and_zero_forcing() {
        let g = Grid::new(-10.0, 10.0, 201).unwrap();
        let v = solve_field_ode(&Profile::constant(g, 2.5), 0.5, 2.0, FieldBc::neumann()).unwrap();
        assert!(v.values.iter().all(|x| (x - 2.5).abs() < 1e-12));
        let z = solve_field_ode(&Profile::zeros(g), 0.5, 2.0, FieldBc::neumann()).unwrap();
        assert!(z.values.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn exponential_forcing_matches_closed_form() {
        let (mu, tau, a) = (0.5, 0.5, 1.0);
        let c = mu + a / mu;
        let d = 1.0 + tau * mu * c - mu * mu;
        let g = Grid::new(-10.0, 10.0, 801).unwrap();
        let u = Profile::from_fn(g, |x| (-mu * x).exp());
        let bc = FieldBc {
            left_growth: -mu,
            right_decay: Some(mu),
        };
        let v = solve_field_ode(&u, tau, c, bc).unwrap();
        let rel = (0..g.n)
            .map(|i| (v.values[i] * d / u.values[i] - 1.0).abs())
            .fold(0.0, f64::max);
        assert!(rel < 10.0 * g.dx * g.dx, "{rel}");
    }

    #[test]
    fn derivative_of_exponential_is_fourth_order_inside() {
        let mu = 0.7;
        let g = Grid::new(0.0, 5.0, 201).unwrap();
        let v = Profile::from_fn(g, |x| (-mu * x).exp());
        let vp = field_derivative(&v);
        for i in 2..g.n - 2 {
            let exact = -mu * (-mu * g.x(i)).exp();
            assert!((vp.values[i] - exact).abs() < 1e-8);
        }
        let ends = (vp.values[0] + mu).abs();
        assert!(ends < 1e-3);
        let c = field_derivative(&Profile::constant(g, 3.0));
        assert!(c.values.iter().all(|x| x.abs() < 1e-12));
    }

    #[test]
    fn kernel_reproduces_constants() {
        let g = Grid::new(-5.0, 5.0, 51).unwrap();
        let v = solve_field_kernel(&Profile::constant(g, 1.7), 0.5, 2.0, KernelOptions::default()).unwrap();
        assert!(v.values.iter().all(|x| (x - 1.7).abs() < 1e-6));
    }
}
