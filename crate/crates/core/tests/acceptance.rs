//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line with
//! its runtime; the process exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use chemotaxis_waves::envelope::{
    build_envelope, verify_sub, verify_sub_shifted, verify_super_constant, verify_super_phi, EnvelopeOptions,
};
use chemotaxis_waves::field::{solve_field_kernel, solve_field_ode, FieldBc, KernelOptions};
use chemotaxis_waves::params::{self, admissible_window, mu_from_speed, ModelParams};
use chemotaxis_waves::spectra::{
    neumann_dirichlet_length, nonexistence_certificate, principal_eigen, BoundaryKind, CertificateOptions, EigenProblem,
};
use chemotaxis_waves::wave::{self, evolve_coupled, fixed_point_wave, EvolveOptions, WaveOptions};
use chemotaxis_waves::{Grid, Profile};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Name, runtime limit and check of one criterion.
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exponential_field_identity() -> Outcome {
    let (a, tau, mu) = (1.0, 0.5, 0.5);
    let c = mu + a / mu;
    let grid = Grid::new(-40.0, 40.0, 4000).map_err(|e| e.to_string())?;
    let u = Profile::from_fn(grid, |x| (-mu * x).exp());
    let bc = FieldBc {
        left_growth: -mu,
        right_decay: Some(mu),
    };
    let v = solve_field_ode(&u, tau, c, bc).map_err(|e| e.to_string())?;
    // The exact field is u/D with D = 1 + tau mu c - mu^2 = 1.375. The profile
    // spans e^{±20}, so the error is measured relative to the exact value.
    let d = 1.0 + tau * mu * c - mu * mu;
    let rel = (0..grid.n)
        .map(|i| (v.values[i] * d / u.values[i] - 1.0).abs())
        .fold(0.0, f64::max);
    let tol = 10.0 * grid.dx * grid.dx;
    ensure(rel <= tol, format!("relative sup-error {rel:.3e} <= {tol:.3e}"))
}

fn cross_method_field() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = Grid::with_spacing(-30.0, 30.0, 0.05).map_err(|e| e.to_string())?;
    let tol = (1e-3f64).max(10.0 * grid.dx * grid.dx);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let base: f64 = rng.gen_range(0.0..2.0);
        let bumps: Vec<(f64, f64, f64)> = (0..3)
            .map(|_| {
                (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-15.0..15.0),
                    rng.gen_range(0.5..3.0),
                )
            })
            .collect();
        let tau: f64 = rng.gen_range(0.0..0.9);
        let c: f64 = rng.gen_range(-2.0..3.0);
        let u = Profile::from_fn(grid, |x| {
            base + bumps
                .iter()
                .map(|(amp, x0, w)| amp * (-((x - x0) / w).powi(2)).exp())
                .sum::<f64>()
        });
        let ode = solve_field_ode(&u, tau, c, FieldBc::neumann()).map_err(|e| e.to_string())?;
        let kernel = solve_field_kernel(&u, tau, c, KernelOptions::default()).map_err(|e| e.to_string())?;
        // Compare away from the ends, where the two methods close the domain
        // differently.
        let lo = grid.index_below(-20.0);
        let hi = grid.index_below(20.0);
        let err = (lo..hi)
            .map(|i| (ode.values[i] - kernel.values[i]).abs())
            .fold(0.0, f64::max);
        worst = worst.max(err);
    }
    ensure(
        worst <= tol,
        format!("worst sup-difference {worst:.3e} <= {tol:.3e} over 20 inputs"),
    )
}

fn threshold_limits() -> Outcome {
    let mut values = Vec::new();
    for tau in [0.5, 0.1, 0.02, 0.004] {
        let p = ModelParams::new(1.0, 1.0, 0.0, tau).map_err(|e| e.to_string())?;
        values.push(params::chi_star(&p).map_err(|e| e.to_string())?);
    }
    let monotone = values.windows(2).all(|w| w[1] > w[0]) && values.iter().all(|&v| v < 0.5);
    let last = *values.last().unwrap();
    let rel = (last / 0.5 - 1.0).abs();
    ensure(
        monotone && rel <= 0.02,
        format!("chi* = {values:.5?}, monotone {monotone}, final rel. gap {rel:.3e} <= 2e-2"),
    )
}

fn speed_window_limits() -> Outcome {
    let mut c_lo = Vec::new();
    let mut c_hi = Vec::new();
    for chi in [1e-1, 1e-2, 1e-3, 1e-4] {
        let p = ModelParams::new(1.0, 1.0, chi, 0.5).map_err(|e| e.to_string())?;
        let w = admissible_window(&p).map_err(|e| e.to_string())?;
        c_lo.push(w.c_star);
        c_hi.push(w.c_star2);
    }
    let decreasing = c_lo.windows(2).all(|w| w[1] <= w[0] + 1e-12);
    let gap = (c_lo[3] / 2.0 - 1.0).abs();
    let upper = c_hi[3];
    ensure(
        decreasing && gap <= 0.01 && upper > 10.0,
        format!("c* = {c_lo:.5?} (final gap {gap:.2e}), c**(1e-4) = {upper:.1}"),
    )
}

/// Runs the four verifiers on the lower, middle and upper envelope members.
fn verifier_suite(p_env: &ModelParams, p_check: &ModelParams, mu: f64, dx: f64) -> Result<bool, String> {
    let grid = wave::default_grid(mu, dx).map_err(|e| e.to_string())?;
    let env = build_envelope(p_env, mu, EnvelopeOptions::for_grid(&grid)).map_err(|e| e.to_string())?;
    let lower = env.u_minus_on(grid);
    let upper = env.u_plus_on(grid);
    let middle = lower.zip_map(&upper, |a, b| 0.5 * (a + b));
    let mut all = true;
    for u in [&lower, &middle, &upper] {
        let reports = [
            verify_super_constant(&env, u, p_check),
            verify_super_phi(&env, u, p_check),
            verify_sub(&env, u, p_check),
            verify_sub_shifted(&env, u, p_check).map(|s| s.report),
        ];
        for r in reports {
            all &= r.map_err(|e| e.to_string())?.pass;
        }
    }
    Ok(all)
}

fn verifier_suite_criterion() -> Outcome {
    let dx = 0.05;
    let mut pairs = Vec::new();
    for chi in [0.02, 0.05, 0.1, 0.15, 0.2] {
        let p = ModelParams::new(1.0, 1.0, chi, 0.5).map_err(|e| e.to_string())?;
        let w = admissible_window(&p).map_err(|e| e.to_string())?;
        for frac in [0.35, 0.7] {
            pairs.push((p, w.mu_star2 + frac * (w.mu_star - w.mu_star2)));
        }
    }
    let mut passed = 0;
    let mut caught = 0;
    for (p, mu) in &pairs {
        if !params::is_admissible(*mu, p) {
            return Err(format!("chi = {}, mu = {mu} is not admissible", p.chi));
        }
        if verifier_suite(p, p, *mu, dx)? {
            passed += 1;
        }
        let weak = ModelParams { b: p.b / 10.0, ..*p };
        if !verifier_suite(p, &weak, *mu, dx)? {
            caught += 1;
        }
    }
    ensure(
        passed == pairs.len() && caught == pairs.len(),
        format!("{passed}/10 pairs pass; b/10 rejected for {caught}/10"),
    )
}

fn wave_construction() -> Outcome {
    let p = ModelParams::new(1.0, 1.0, 0.01, 0.5).map_err(|e| e.to_string())?;
    let w = admissible_window(&p).map_err(|e| e.to_string())?;
    let mu_mid = 0.5 * (w.mu_star2 + w.mu_star);
    let c = mu_mid + p.a / mu_mid;
    let mu = mu_from_speed(c, &p).map_err(|e| e.to_string())?;
    let mut residuals = Vec::new();
    let mut details = Vec::new();
    let mut ok = w.contains_speed(c);
    for dx in [0.04, 0.02] {
        let grid = Grid::with_spacing(-40.0, 40.0, dx).map_err(|e| e.to_string())?;
        let opts = WaveOptions {
            dx,
            ..WaveOptions::default()
        };
        let prof = fixed_point_wave(&p, c, Some(grid), &opts).map_err(|e| e.to_string())?;
        let rate = wave::decay_rate(&prof.u, 0.25).map_err(|e| e.to_string())?;
        let rate_err = (rate / mu - 1.0).abs();
        let left_ok = (0.99..=1.01).contains(&(prof.left_state / (p.a / p.b)));
        ok &= left_ok && rate_err <= 0.02 && prof.residual_norm <= prof.residual_tolerance;
        details.push(format!(
            "dx {dx}: left {:.5}, decay err {rate_err:.2e}, residual {:.2e}/{:.2e}",
            prof.left_state, prof.residual_norm, prof.residual_tolerance
        ));
        residuals.push(prof.residual_norm);
    }
    let ratio = residuals[0] / residuals[1];
    ok &= ratio >= 3.5;
    ensure(
        ok,
        format!("c = {c:.4}; {}; refinement ratio {ratio:.2}", details.join("; ")),
    )
}

/// Heteroclinic orbit of `U'' + cU' + U(1 - U) = 0` by shooting from the
/// unstable direction of `U = 1`; returns samples `(x, U)`.
fn kpp_shooting(c: f64) -> Vec<(f64, f64)> {
    let r = 0.5 * (-c + (c * c + 4.0).sqrt());
    let eta = 1e-9;
    let mut y = [1.0 - eta, -eta * r];
    let h = 1e-3;
    let rhs = |y: [f64; 2]| [y[1], -c * y[1] - y[0] * (1.0 - y[0])];
    let mut x = 0.0;
    let mut out = vec![(x, y[0])];
    while y[0] > 1e-12 && x < 400.0 {
        let k1 = rhs(y);
        let k2 = rhs([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs([y[0] + h * k3[0], y[1] + h * k3[1]]);
        for k in 0..2 {
            y[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        x += h;
        out.push((x, y[0]));
    }
    out
}

fn crossing(samples: &[(f64, f64)], level: f64) -> Option<f64> {
    samples.windows(2).find_map(|w| {
        let ((x0, u0), (x1, u1)) = (w[0], w[1]);
        (u0 >= level && u1 < level).then(|| x0 + (u0 - level) / (u0 - u1) * (x1 - x0))
    })
}

fn kpp_oracle() -> Outcome {
    let c = 2.5;
    let p = ModelParams::new(1.0, 1.0, 0.0, 0.5).map_err(|e| e.to_string())?;
    let prof = fixed_point_wave(&p, c, None, &WaveOptions::default()).map_err(|e| e.to_string())?;
    let numeric: Vec<(f64, f64)> = (0..prof.u.len()).map(|i| (prof.u.x(i), prof.u.values[i])).collect();
    let oracle = kpp_shooting(c);
    let shift = crossing(&oracle, 0.5).ok_or("oracle never crosses 1/2")?
        - crossing(&numeric, 0.5).ok_or("wave never crosses 1/2")?;
    let step = oracle[1].0 - oracle[0].0;
    let exact = |x: f64| -> f64 {
        let s = x + shift;
        if s <= 0.0 {
            return oracle[0].1;
        }
        let k = (s / step) as usize;
        if k + 1 >= oracle.len() {
            return 0.0;
        }
        let w = (s - oracle[k].0) / step;
        oracle[k].1 * (1.0 - w) + oracle[k + 1].1 * w
    };
    let err = numeric.iter().map(|&(x, u)| (u - exact(x)).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-3, format!("sup-error after alignment {err:.3e} <= 1e-3"))
}

fn perturbed_initial(grid: Grid, steady: f64, seed: u64) -> Profile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..grid.n)
        .map(|_| 3.0 * steady * (1.0 + 0.1 * rng.gen::<f64>()))
        .collect();
    Profile { grid, values }
}

fn evolution_params() -> (ModelParams, f64) {
    (ModelParams::new(1.0, 1.0, 0.1, 0.5).unwrap(), 1.0)
}

fn global_bound() -> Outcome {
    let (p, c) = evolution_params();
    if !p.global_bound_holds(c) {
        return Err("parameters violate the bound hypothesis".into());
    }
    let grid = Grid::with_spacing(-50.0, 50.0, 0.1).map_err(|e| e.to_string())?;
    let u0 = perturbed_initial(grid, p.steady_state(), 1);
    let bound = p.global_bound(u0.sup_norm(), c).ok_or("no bound")?;
    let opts = EvolveOptions {
        t_end: 100.0,
        ..EvolveOptions::default()
    };
    let traj = evolve_coupled(&u0, &p, c, &opts).map_err(|e| e.to_string())?;
    let worst = traj.sup_u.iter().copied().fold(0.0, f64::max);
    ensure(
        worst <= bound + 1e-3,
        format!("max sup u = {worst:.6} <= {:.6}", bound + 1e-3),
    )
}

fn stability() -> Outcome {
    let (p, c) = evolution_params();
    if !p.stability_holds(c) {
        return Err("parameters violate the stability hypothesis".into());
    }
    let grid = Grid::with_spacing(-50.0, 50.0, 0.1).map_err(|e| e.to_string())?;
    let u0 = perturbed_initial(grid, p.steady_state(), 2);
    let opts = EvolveOptions {
        t_end: 200.0,
        ..EvolveOptions::default()
    };
    let traj = evolve_coupled(&u0, &p, c, &opts).map_err(|e| e.to_string())?;
    let dev = *traj.deviation.last().unwrap();
    ensure(dev <= 1e-3, format!("deviation at t = 200: {dev:.3e} <= 1e-3"))
}

fn eigen_closed_form() -> Outcome {
    let d = principal_eigen(
        &EigenProblem::unperturbed(1.0, 0.0, 2.0 * PI, BoundaryKind::DirichletDirichlet),
        2000,
    )
    .map_err(|e| e.to_string())?;
    let d_err = (d.lambda - 0.75).abs();
    let nd = neumann_dirichlet_length(1.0, -1.0, 0.9).map_err(|e| e.to_string())?;
    let l_err = (nd.length - 2.66393).abs();
    let e = principal_eigen(
        &EigenProblem::unperturbed(1.0, -1.0, nd.length, BoundaryKind::NeumannDirichlet),
        2000,
    )
    .map_err(|e| e.to_string())?;
    let nd_err = (e.lambda - 0.9).abs();
    ensure(
        d_err <= 1e-4 && l_err <= 1e-4 && nd_err <= 1e-3,
        format!(
            "Dirichlet error {d_err:.2e}; ND length {:.6} (gap {l_err:.1e}), eigenvalue error {nd_err:.2e}",
            nd.length
        ),
    )
}

fn nonexistence() -> Outcome {
    let p = ModelParams::new(1.0, 1.0, 0.05, 0.5).map_err(|e| e.to_string())?;
    let grid = Grid::with_spacing(-30.0, 40.0, 0.05).map_err(|e| e.to_string())?;
    let u = Profile::from_fn(grid, |x| 0.5 * (1.0 - x.tanh()));
    let report = nonexistence_certificate(&u, &p, 1.0, &CertificateOptions::default()).map_err(|e| e.to_string())?;
    let per_eps: Vec<String> = report
        .epsilons
        .iter()
        .map(|r| {
            format!(
                "eps {:.0e}: lambda {:.4}, positive {}",
                r.epsilon, r.lambda_eps, r.test_function_positive
            )
        })
        .collect();
    ensure(
        report.triggered,
        format!("{}; triggered {}", per_eps.join("; "), report.triggered),
    )
}

fn front_speed_floor() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for chi in [0.0, 0.01] {
        let p = ModelParams::new(1.0, 1.0, chi, 0.5).map_err(|e| e.to_string())?;
        let grid = Grid::with_spacing(0.0, 260.0, 0.1).map_err(|e| e.to_string())?;
        let u0 = Profile::from_fn(grid, |x| if x <= 10.0 { 1.0 } else { 0.0 });
        let opts = EvolveOptions {
            t_end: 100.0,
            snapshot_every: Some(1.0),
            ..EvolveOptions::default()
        };
        let traj = evolve_coupled(&u0, &p, 0.0, &opts).map_err(|e| e.to_string())?;
        let f = wave::front_speed(&traj, 1e-2).map_err(|e| e.to_string())?;
        ok &= !f.truncated && f.speed >= 0.95 * 2.0 * p.a.sqrt();
        details.push(format!("chi {chi}: speed {:.4}", f.speed));
    }
    ensure(ok, format!("{} (floor 1.9)", details.join(", ")))
}

fn main() {
    let criteria: [Criterion; 12] = [
        (
            "exponential field identity",
            Duration::from_secs(1),
            exponential_field_identity,
        ),
        (
            "cross-method field agreement",
            Duration::from_secs(30),
            cross_method_field,
        ),
        ("threshold limit", Duration::from_secs(5), threshold_limits),
        ("speed-window limits", Duration::from_secs(10), speed_window_limits),
        (
            "super/sub verifier suite",
            Duration::from_secs(20),
            verifier_suite_criterion,
        ),
        ("wave construction", Duration::from_secs(180), wave_construction),
        ("KPP oracle", Duration::from_secs(60), kpp_oracle),
        ("global bound", Duration::from_secs(120), global_bound),
        ("stability", Duration::from_secs(180), stability),
        ("eigenvalue closed forms", Duration::from_secs(10), eigen_closed_form),
        ("nonexistence certificate", Duration::from_secs(30), nonexistence),
        ("front-speed floor", Duration::from_secs(300), front_speed_floor),
    ];
    let mut failures = 0;
    for (k, (name, limit, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= *limit;
        let (ok, detail) = match outcome {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {detail} ({:.2}s, limit {}s{})",
            if ok { "PASS" } else { "FAIL" },
            k + 1,
            elapsed.as_secs_f64(),
            limit.as_secs(),
            if in_time { "" } else { ", too slow" }
        );
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
