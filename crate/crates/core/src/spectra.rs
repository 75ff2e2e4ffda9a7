//! Principal eigenvalues of `φ'' + (c + b1)φ' + (a + b2)φ = λφ` on `(0, L)`
//! with Dirichlet–Dirichlet or Neumann–Dirichlet conditions, the explicit
//! constructions that make the unperturbed eigenvalue positive for slow
//! speeds, and the resulting nonexistence certificate.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::envelope::FieldPair;
use crate::error::{Error, Result};
use crate::field::FieldBc;
use crate::grid::Profile;
use crate::params::ModelParams;
use crate::tridiag::Tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    DirichletDirichlet,
    NeumannDirichlet,
}

/// The operator data. `b1`, `b2` are either empty (identically zero) or
/// sampled at the `n` uniform nodes `x_j = j L/(n-1)` of the solve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenProblem {
    pub a: f64,
    pub c: f64,
    pub b1: Vec<f64>,
    pub b2: Vec<f64>,
    pub length: f64,
    pub bc: BoundaryKind,
}

impl EigenProblem {
    pub fn unperturbed(a: f64, c: f64, length: f64, bc: BoundaryKind) -> Self {
        Self {
            a,
            c,
            b1: Vec::new(),
            b2: Vec::new(),
            length,
            bc,
        }
    }
}

/// `L = 2π / sqrt(4a - 4λ0 - c^2)`, the interval on which
/// `e^{-cx/2} sin(πx/L)` is the principal eigenfunction with eigenvalue `λ0`.
pub fn dirichlet_length(a: f64, c: f64, lambda0: f64) -> Result<f64> {
    let disc = 4.0 * a - 4.0 * lambda0 - c * c;
    if !(disc > 0.0) || c < 0.0 {
        return Err(Error::NoConstruction(format!(
            "need c >= 0 and c^2 - 4a + 4 lambda0 < 0, got c = {c}, discriminant {}",
            -disc
        )));
    }
    Ok(2.0 * std::f64::consts::PI / disc.sqrt())
}

/// `e^{-cx/2} sin(πx/L)`.
pub fn dirichlet_eigenfunction(c: f64, length: f64, x: f64) -> f64 {
    (-c * x / 2.0).exp() * (std::f64::consts::PI * x / length).sin()
}

/// Neumann–Dirichlet construction for `c < 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeumannDirichlet {
    pub length: f64,
    /// `Δ = c^2 - 4a + 4λ0`.
    pub delta: f64,
    pub r1: f64,
    pub r2: f64,
}

impl NeumannDirichlet {
    /// `-e^{r1 x} + (r1/r2) e^{r2 x}`, `r_{1,2} = (-c ± sqrt(Δ))/2`.
    pub fn eigenfunction(&self, x: f64) -> f64 {
        -(self.r1 * x).exp() + (self.r1 / self.r2) * (self.r2 * x).exp()
    }

    pub fn eigenfunction_derivative(&self, x: f64) -> f64 {
        -self.r1 * (self.r1 * x).exp() + self.r1 * (self.r2 * x).exp()
    }
}

pub fn neumann_dirichlet_length(a: f64, c: f64, lambda0: f64) -> Result<NeumannDirichlet> {
    let delta = c * c - 4.0 * a + 4.0 * lambda0;
    if !(c < 0.0) || !(lambda0 > 0.0 && lambda0 < a) || !(delta > 0.0) {
        return Err(Error::NoConstruction(format!(
            "need c < 0, 0 < lambda0 < a and 4a - 4 lambda0 < c^2; got c = {c}, lambda0 = {lambda0}, a = {a}"
        )));
    }
    let s = delta.sqrt();
    let length = ((-c + s) / (-c - s)).ln() / s;
    Ok(NeumannDirichlet {
        length,
        delta,
        r1: (-c + s) / 2.0,
        r2: (-c - s) / 2.0,
    })
}

/// Principal eigenpair and its cross-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub lambda: f64,
    /// Next eigenvalue of the discretisation.
    pub lambda_second: f64,
    pub x: Vec<f64>,
    /// Eigenfunction on all `n` nodes, positive with sup-norm 1.
    pub phi: Vec<f64>,
    /// Growth rate of `ln ‖u(t)‖` for the time-dependent problem.
    pub lambda_time: f64,
    pub cross_check: f64,
    pub positive: bool,
    pub warning: Option<String>,
}

/// The discretised operator on the unknown nodes together with the node
/// offset (1 for Dirichlet at 0, 0 for Neumann at 0).
fn assemble(prob: &EigenProblem, n: usize) -> Result<(Tridiagonal, usize)> {
    let h = prob.length / (n - 1) as f64;
    let coef = |v: &Vec<f64>, j: usize| if v.is_empty() { 0.0 } else { v[j] };
    for (name, v) in [("b1", &prob.b1), ("b2", &prob.b2)] {
        if !v.is_empty() && v.len() != n {
            return Err(Error::Domain(format!("{name} has {} samples for {n} nodes", v.len())));
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain(format!("{name} has non-finite samples")));
        }
    }
    let first = match prob.bc {
        BoundaryKind::DirichletDirichlet => 1,
        BoundaryKind::NeumannDirichlet => 0,
    };
    let m = n - 1 - first;
    let mut t = Tridiagonal::zeros(m);
    for k in 0..m {
        let j = k + first;
        let drift = prob.c + coef(&prob.b1, j);
        if drift.abs() * h >= 2.0 {
            return Err(Error::Domain(format!(
                "grid too coarse for drift {drift}: need more than {} points",
                (drift.abs() * prob.length / 2.0).ceil() as usize + 1
            )));
        }
        let lo = 1.0 / (h * h) - drift / (2.0 * h);
        let up = 1.0 / (h * h) + drift / (2.0 * h);
        t.lower[k] = lo;
        t.upper[k] = up;
        t.diag[k] = -2.0 / (h * h) + prob.a + coef(&prob.b2, j);
        if j == 0 {
            // Ghost node φ_{-1} = φ_1.
            t.upper[k] = lo + up;
        }
    }
    Ok((t, first))
}

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `d` and squared off-diagonals `e2`.
fn sturm_count(d: &[f64], e2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e2[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th largest eigenvalue (k = 0 is the largest) by Sturm bisection.
fn kth_largest(d: &[f64], e2: &[f64], k: usize) -> f64 {
    let m = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..m {
        let r = if i > 0 { e2[i - 1].sqrt() } else { 0.0 } + if i + 1 < m { e2[i].sqrt() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    // Eigenvalue index from below.
    let target = m - 1 - k;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e2, mid) > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Principal eigenpair by Sturm bisection on the symmetrised matrix and
/// shifted inverse iteration for the eigenfunction, cross-checked by the
/// log-growth rate of the time-dependent problem.
pub fn principal_eigen(prob: &EigenProblem, n: usize) -> Result<EigenResult> {
    if n < 50 {
        return Err(Error::Domain(format!("need at least 50 grid points, got {n}")));
    }
    if !(prob.length > 0.0) {
        return Err(Error::Domain("interval length must be positive".into()));
    }
    let (t, first) = assemble(prob, n)?;
    let m = t.len();
    // Off-diagonal products are positive, so the matrix is similar to a
    // symmetric one with off-diagonals sqrt(upper_i lower_{i+1}).
    let e2: Vec<f64> = (0..m - 1).map(|i| t.upper[i] * t.lower[i + 1]).collect();
    let lambda = kth_largest(&t.diag, &e2, 0);
    let lambda_second = kth_largest(&t.diag, &e2, 1);

    // Inverse iteration on (σ I - A), an M-matrix for σ above the Perron root.
    let gap = (lambda - lambda_second).max(1e-12);
    let sigma = lambda + 1e-6 * gap;
    let mut shifted = Tridiagonal::zeros(m);
    for i in 0..m {
        shifted.diag[i] = sigma - t.diag[i];
        shifted.lower[i] = -t.lower[i];
        shifted.upper[i] = -t.upper[i];
    }
    let mut y = vec![1.0; m];
    let mut converged = false;
    for _ in 0..50 {
        let mut z = shifted.solve(&y)?;
        let norm = z.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        for v in &mut z {
            *v /= norm;
        }
        let change = z.iter().zip(&y).fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        y = z;
        if change < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations: 50,
            history: Vec::new(),
        });
    }
    let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    let mut phi = vec![0.0; n];
    for (k, v) in y.iter().enumerate() {
        phi[k + first] = sign * v;
    }
    let positive = y.iter().all(|v| sign * v > 0.0);
    let warning = (!positive).then(|| {
        warn!("principal eigenfunction changes sign; eigenvalue may be degenerate");
        "eigenfunction is not of one sign".to_string()
    });
    let h = prob.length / (n - 1) as f64;
    let x = (0..n).map(|j| j as f64 * h).collect();

    let lambda_time = growth_rate(&t, lambda - lambda_second);
    Ok(EigenResult {
        lambda,
        lambda_second,
        x,
        phi,
        cross_check: (lambda_time - lambda).abs(),
        lambda_time,
        positive,
        warning,
    })
}

/// Slope of `ln ‖u(t)‖_2` for `u' = A u`: four backward Euler steps damp the
/// stiff modes, then Crank–Nicolson to a horizon long enough for the second
/// mode to die out.
fn growth_rate(a: &Tridiagonal, gap: f64) -> f64 {
    let m = a.len();
    let horizon = (40.0f64).max(30.0 / gap.max(1e-3)).min(4e4);
    let dt = (0.01f64).max(horizon / 2e5);
    let build = |theta: f64| {
        let mut lhs = Tridiagonal::zeros(m);
        for i in 0..m {
            lhs.diag[i] = 1.0 - theta * dt * a.diag[i];
            lhs.lower[i] = -theta * dt * a.lower[i];
            lhs.upper[i] = -theta * dt * a.upper[i];
        }
        lhs
    };
    let be = build(1.0);
    let cn = build(0.5);
    let mut u: Vec<f64> = (0..m).map(|i| 1.0 + 0.1 * ((i as f64 + 1.0) / m as f64)).collect();
    let mut log_norm = 0.0;
    let mut scratch = vec![0.0; m];
    let mut next = vec![0.0; m];
    let mut samples = Vec::new();
    let steps = (horizon / dt).ceil() as usize;
    for step in 0..steps {
        if step < 4 {
            be.solve_into(&u, &mut next, &mut scratch).expect("M-matrix");
        } else {
            let au = a.apply(&u);
            let rhs: Vec<f64> = u.iter().zip(&au).map(|(v, w)| v + 0.5 * dt * w).collect();
            cn.solve_into(&rhs, &mut next, &mut scratch).expect("M-matrix");
        }
        std::mem::swap(&mut u, &mut next);
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        log_norm += norm.ln();
        for v in &mut u {
            *v /= norm;
        }
        let t = (step + 1) as f64 * dt;
        if t >= 0.5 * horizon {
            samples.push((t, log_norm));
        }
    }
    let nf = samples.len() as f64;
    let mt = samples.iter().map(|s| s.0).sum::<f64>() / nf;
    let ml = samples.iter().map(|s| s.1).sum::<f64>() / nf;
    let sxy: f64 = samples.iter().map(|s| (s.0 - mt) * (s.1 - ml)).sum();
    let sxx: f64 = samples.iter().map(|s| (s.0 - mt) * (s.0 - mt)).sum();
    sxy / sxx
}

/// Settings for [`nonexistence_certificate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateOptions {
    pub epsilons: Vec<f64>,
    /// Eigen grid points; the default keeps the spacing at `L/1000`.
    pub n: usize,
}

impl Default for CertificateOptions {
    fn default() -> Self {
        Self {
            epsilons: vec![1e-2, 1e-3],
            n: 1001,
        }
    }
}

/// Per-`ε` outcome.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    /// Leftmost point beyond which `max(|U|, |V|, |V'|) < ε`; `None` if the
    /// window `[x_eps, x_eps + L]` does not fit in the domain.
    pub x_eps: Option<f64>,
    /// Principal eigenvalue with the perturbations `b1`, `b2`.
    pub lambda_eps: f64,
    /// `sup ℒ_ε U / U` over the window interior; for a genuine wave this is
    /// zero up to discretisation error and bounds `λ^ε` from above.
    pub test_function_bound: f64,
    /// `U > 0` inside the window and nonnegative at its ends.
    pub test_function_positive: bool,
    /// `λ^ε > 0` while the profile meets the positivity hypotheses that would
    /// force `λ^ε <= 0` for a genuine wave.
    pub contradiction: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CertificateReport {
    pub c: f64,
    pub bc: BoundaryKind,
    pub lambda0: f64,
    pub length: f64,
    /// Numerical principal eigenvalue without perturbation.
    pub lambda_unperturbed: f64,
    pub epsilons: Vec<EpsilonReport>,
    pub inconclusive: bool,
    /// Every `ε` produced the contradiction pair.
    pub triggered: bool,
}

/// Rule out a claimed traveling wave `U` of speed `c < 2 sqrt(a)`.
pub fn nonexistence_certificate(
    u: &Profile,
    p: &ModelParams,
    c: f64,
    opts: &CertificateOptions,
) -> Result<CertificateReport> {
    p.validate()?;
    let a = p.a;
    if !(c < 2.0 * a.sqrt()) {
        return Err(Error::NotApplicable(format!(
            "certificate needs c < 2 sqrt(a) = {}, got {c}",
            2.0 * a.sqrt()
        )));
    }
    let (bc, lambda0, length) = if c >= 0.0 {
        let l0 = (a - c * c / 4.0) / 2.0;
        (BoundaryKind::DirichletDirichlet, l0, dirichlet_length(a, c, l0)?)
    } else {
        let l0 = 0.5 * ((a - c * c / 4.0).max(0.0) + a);
        (
            BoundaryKind::NeumannDirichlet,
            l0,
            neumann_dirichlet_length(a, c, l0)?.length,
        )
    };
    let n = opts.n.max(50);
    let base = principal_eigen(&EigenProblem::unperturbed(a, c, length, bc), n)?;

    let field = FieldPair::solve(u, p.tau, c, FieldBc::neumann())?;
    let grid = u.grid;
    let size = |i: usize| {
        u.values[i]
            .abs()
            .max(field.v.values[i].abs())
            .max(field.vp.values[i].abs())
    };
    let h = length / (n - 1) as f64;
    let mut reports = Vec::new();
    for &eps in &opts.epsilons {
        // Scan from the right for the last point that is not small.
        let start = (0..grid.n).rev().find(|&i| size(i) >= eps).map_or(0, |i| i + 1);
        let x_eps = (start < grid.n).then(|| grid.x(start));
        let fits = x_eps.is_some_and(|x| x + length <= grid.x_max);
        if !fits {
            reports.push(EpsilonReport {
                epsilon: eps,
                x_eps: None,
                lambda_eps: f64::NAN,
                test_function_bound: f64::NAN,
                test_function_positive: false,
                contradiction: false,
            });
            continue;
        }
        let x0 = x_eps.expect("checked");
        let sample = |prof: &Profile| -> Vec<f64> { (0..n).map(|j| prof.interpolate(x0 + j as f64 * h)).collect() };
        let us = sample(u);
        let vs = sample(&field.v);
        let vps = sample(&field.vp);
        let b1: Vec<f64> = vps.iter().map(|w| -p.chi * w).collect();
        let b2: Vec<f64> = (0..n)
            .map(|j| -p.chi * (vs[j] - p.tau * c * vps[j]) - (p.b - p.chi) * us[j])
            .collect();
        let prob = EigenProblem {
            a,
            c,
            b1: b1.clone(),
            b2: b2.clone(),
            length,
            bc,
        };
        let eig = principal_eigen(&prob, n)?;
        let mut bound = f64::NEG_INFINITY;
        let mut positive = us[0] >= 0.0 && us[n - 1] >= 0.0;
        for j in 1..n - 1 {
            if us[j] <= 0.0 {
                positive = false;
                continue;
            }
            let d1 = (us[j + 1] - us[j - 1]) / (2.0 * h);
            let d2 = (us[j + 1] - 2.0 * us[j] + us[j - 1]) / (h * h);
            let l = d2 + (c + b1[j]) * d1 + (a + b2[j]) * us[j];
            bound = bound.max(l / us[j]);
        }
        reports.push(EpsilonReport {
            epsilon: eps,
            x_eps,
            lambda_eps: eig.lambda,
            test_function_bound: bound,
            test_function_positive: positive,
            contradiction: eig.lambda > 0.0 && positive,
        });
    }
    let inconclusive = reports.iter().any(|r| r.x_eps.is_none());
    let triggered = !inconclusive && base.lambda > 0.0 && reports.iter().all(|r| r.contradiction);
    Ok(CertificateReport {
        c,
        bc,
        lambda0,
        length,
        lambda_unperturbed: base.lambda,
        epsilons: reports,
        inconclusive,
        triggered,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_length_examples() {
        assert_relative_eq!(dirichlet_length(1.0, 0.0, 0.75).unwrap(), 2.0 * PI, epsilon = 1e-14);
        assert_relative_eq!(dirichlet_length(1.0, 1.0, 0.5).unwrap(), 2.0 * PI, epsilon = 1e-14);
        assert!(dirichlet_length(1.0, 1.0, 0.75 - 1e-9).unwrap() > 1e4);
        assert!(dirichlet_length(1.0, 2.0, 0.1).is_err());
    }

    #[test]
    fn neumann_dirichlet_example() {
        let nd = neumann_dirichlet_length(1.0, -1.0, 0.9).unwrap();
        assert_relative_eq!(nd.delta, 0.6, epsilon = 1e-14);
        let s = 0.6f64.sqrt();
        assert_relative_eq!(nd.length, ((1.0 + s) / (1.0 - s)).ln() / s, epsilon = 1e-14);
        assert_relative_eq!(nd.length, 2.66393, epsilon = 1e-4);
        assert!(nd.eigenfunction(nd.length).abs() < 1e-12);
        assert!(nd.eigenfunction_derivative(0.0).abs() < 1e-14);
        for k in 1..100 {
            assert!(nd.eigenfunction(nd.length * k as f64 / 100.0) > 0.0);
        }
        assert!(neumann_dirichlet_length(1.0, 1.0, 0.9).is_err());
        assert!(neumann_dirichlet_length(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn closed_form_dirichlet_eigenvalue() {
        let r = principal_eigen(
            &EigenProblem::unperturbed(1.0, 0.0, 2.0 * PI, BoundaryKind::DirichletDirichlet),
            2000,
        )
        .unwrap();
        assert!((r.lambda - 0.75).abs() < 1e-4);
        assert!(r.cross_check < 1e-4);
        assert!(r.positive);
    }

    #[test]
    fn constant_b2_shifts_eigenvalue() {
        let mut prob = EigenProblem::unperturbed(1.0, 0.5, 6.0, BoundaryKind::DirichletDirichlet);
        let base = principal_eigen(&prob, 400).unwrap().lambda;
        prob.b2 = vec![-0.2; 400];
        let shifted = principal_eigen(&prob, 400).unwrap().lambda;
        assert!((shifted - (base - 0.2)).abs() < 1e-10);
    }

    #[test]
    fn not_applicable_for_fast_speeds() {
        let p = ModelParams::new(1.0, 1.0, 0.1, 0.5).unwrap();
        let g = crate::grid::Grid::new(-10.0, 10.0, 101).unwrap();
        let u = Profile::zeros(g);
        assert!(matches!(
            nonexistence_certificate(&u, &p, 2.5, &CertificateOptions::default()),
            Err(Error::NotApplicable(_))
        ));
    }
}
