//! Dispersion relation, admissible wave numbers, the chemotaxis threshold
//! and the speed window.
//!
//! Everything here is a pure function of `(a, b, chi, tau)` and a wave number
//! `mu`. The wave with tail `e^{-mu x}` travels at `c_mu = mu + a/mu`; the
//! tail exponent is admissible when
//!
//! ```text
//! G1(mu) = 1 + tau c_mu                                  <  (b - chi)/chi
//! G2(mu) = (mu + tau c_mu)/sqrt(D) + mu (mu + tau c_mu)/D <= (b - chi)/chi
//! D(mu)  = 1 + tau mu c_mu - mu^2
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// The model quadruple `(a, b, chi, tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Growth rate of the logistic source.
    pub a: f64,
    /// Logistic damping.
    pub b: f64,
    /// Chemotactic sensitivity.
    pub chi: f64,
    /// Time constant of the chemical equation.
    pub tau: f64,
}

impl ModelParams {
    pub fn new(a: f64, b: f64, chi: f64, tau: f64) -> Result<Self> {
        let p = Self { a, b, chi, tau };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.chi, self.tau].iter().all(|v| v.is_finite());
        if !finite {
            return Err(domain("model parameters must be finite"));
        }
        if self.a <= 0.0 {
            return Err(domain(format!("a must be positive, got {}", self.a)));
        }
        if self.b <= 0.0 {
            return Err(domain(format!("b must be positive, got {}", self.b)));
        }
        if self.chi < 0.0 {
            return Err(domain(format!("chi must be nonnegative, got {}", self.chi)));
        }
        if self.tau < 0.0 {
            return Err(domain(format!("tau must be nonnegative, got {}", self.tau)));
        }
        Ok(())
    }

    /// The spatially homogeneous positive state `a/b`.
    pub fn steady_state(&self) -> f64 {
        self.a / self.b
    }

    /// `(b - chi)/chi`, the right-hand side of the admissibility
    /// constraints; `+inf` without chemotaxis.
    pub fn constraint_rhs(&self) -> f64 {
        if self.chi == 0.0 {
            f64::INFINITY
        } else {
            (self.b - self.chi) / self.chi
        }
    }

    /// Global-boundedness hypothesis for the moving frame with speed `c`:
    /// `0 <= chi tau c / 2 < b - chi`.
    pub fn global_bound_holds(&self, c: f64) -> bool {
        let lhs = self.chi * self.tau * c / 2.0;
        lhs >= 0.0 && lhs < self.b - self.chi
    }

    /// Stability hypothesis for `(a/b, a/b)`: `0 <= chi tau c < b - 2 chi`.
    pub fn stability_holds(&self, c: f64) -> bool {
        let lhs = self.chi * self.tau * c;
        lhs >= 0.0 && lhs < self.b - 2.0 * self.chi
    }

    /// The a-priori sup bound `max{|u0|, a/(b - chi - chi c tau / 2)}`,
    /// or `None` when the global-boundedness hypothesis fails.
    pub fn global_bound(&self, u0_sup: f64, c: f64) -> Option<f64> {
        if !self.global_bound_holds(c) {
            return None;
        }
        let denom = self.b - self.chi - self.chi * c * self.tau / 2.0;
        Some(u0_sup.max(self.a / denom))
    }
}

/// `c_mu = mu + a/mu`.
pub fn wave_speed(mu: f64, a: f64) -> Result<f64> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(domain(format!("wave number must be positive, got {mu}")));
    }
    if !(a > 0.0) {
        return Err(domain(format!("growth rate must be positive, got {a}")));
    }
    Ok(mu + a / mu)
}

/// `min{sqrt(a), sqrt((1 + tau a)/(1 - tau)_+)}`; the second term is `+inf`
/// once `tau >= 1`.
pub fn mu_max(a: f64, tau: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(domain(format!("growth rate must be positive, got {a}")));
    }
    if !(tau >= 0.0) {
        return Err(domain(format!("tau must be nonnegative, got {tau}")));
    }
    let positive_part = (1.0 - tau).max(0.0);
    let second = if positive_part == 0.0 {
        f64::INFINITY
    } else {
        ((1.0 + tau * a) / positive_part).sqrt()
    };
    Ok(a.sqrt().min(second))
}

/// `1 + tau mu c_mu - mu^2`, which simplifies to `1 + tau a - (1 - tau) mu^2`.
pub fn denominator(mu: f64, a: f64, tau: f64) -> f64 {
    let c = mu + a / mu;
    1.0 + tau * mu * c - mu * mu
}

/// A wave number together with its derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WaveNumbers {
    pub mu: f64,
    pub c_mu: f64,
    pub mu_tau: f64,
    /// `1 + tau mu c_mu - mu^2`.
    pub d: f64,
}

impl WaveNumbers {
    pub fn new(mu: f64, a: f64, tau: f64) -> Result<Self> {
        let c_mu = wave_speed(mu, a)?;
        let mu_tau = mu_max(a, tau)?;
        Ok(Self {
            mu,
            c_mu,
            mu_tau,
            d: 1.0 + tau * mu * c_mu - mu * mu,
        })
    }

    /// Whether `mu` lies in the open interval `(0, mu_tau)`.
    pub fn in_range(&self) -> bool {
        self.mu > 0.0 && self.mu < self.mu_tau
    }
}

/// The two constraint functions at a wave number.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstraintValues {
    pub g1: f64,
    pub g2: f64,
}

impl ConstraintValues {
    pub fn max(&self) -> f64 {
        self.g1.max(self.g2)
    }
}

fn g1_raw(mu: f64, a: f64, tau: f64) -> f64 {
    1.0 + tau * (mu + a / mu)
}

/// `G2` without range checks; `+inf` where the denominator is not positive.
fn g2_raw(mu: f64, a: f64, tau: f64) -> f64 {
    let c = mu + a / mu;
    let d = 1.0 + tau * mu * c - mu * mu;
    if !(d > 0.0) {
        return f64::INFINITY;
    }
    let num = mu + tau * c;
    num / d.sqrt() + mu * num / d
}

fn max_constraint_raw(mu: f64, a: f64, tau: f64) -> f64 {
    g1_raw(mu, a, tau).max(g2_raw(mu, a, tau))
}

/// `(G1, G2)` at `mu`; fails when the denominator `D(mu)` is not positive.
pub fn constraint_values(mu: f64, p: &ModelParams) -> Result<ConstraintValues> {
    if !(mu > 0.0) {
        return Err(domain(format!("wave number must be positive, got {mu}")));
    }
    let d = denominator(mu, p.a, p.tau);
    if !(d > 0.0) {
        return Err(domain(format!(
            "1 + tau mu c_mu - mu^2 = {d} is not positive at mu = {mu}"
        )));
    }
    Ok(ConstraintValues {
        g1: g1_raw(mu, p.a, p.tau),
        g2: g2_raw(mu, p.a, p.tau),
    })
}

/// Whether `(p, mu)` satisfies the admissibility pair: strict for `G1`,
/// non-strict for `G2`, and `mu` strictly inside `(0, mu_tau)`.
pub fn is_admissible(mu: f64, p: &ModelParams) -> bool {
    let Ok(mu_tau) = mu_max(p.a, p.tau) else {
        return false;
    };
    if !(mu > 0.0 && mu < mu_tau) {
        return false;
    }
    match constraint_values(mu, p) {
        Ok(g) => {
            let rhs = p.constraint_rhs();
            g.g1 < rhs && g.g2 <= rhs
        }
        Err(_) => false,
    }
}

/// Scan resolution and root tolerances used by [`m_tau`] and
/// [`admissible_window`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub cells: usize,
    pub root_tol: f64,
    pub min_rel_tol: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            cells: 10_000,
            root_tol: 1e-12,
            min_rel_tol: 1e-10,
        }
    }
}

/// `inf over (0, mu_tau) of max{G1, G2}` with default resolution.
pub fn m_tau(a: f64, tau: f64) -> Result<f64> {
    m_tau_with(a, tau, ScanOptions::default()).map(|(m, _)| m)
}

/// Dense scan followed by golden-section refinement. Returns the infimum and
/// its (approximate) minimiser.
pub fn m_tau_with(a: f64, tau: f64, opts: ScanOptions) -> Result<(f64, f64)> {
    let mu_tau = mu_max(a, tau)?;
    let n = opts.cells.max(4);
    let h = mu_tau / n as f64;
    let f = |mu: f64| max_constraint_raw(mu, a, tau);

    let mut best_j = 1;
    let mut best = f64::INFINITY;
    for j in 1..n {
        let v = f(j as f64 * h);
        if v < best {
            best = v;
            best_j = j;
        }
    }
    let lo = (best_j - 1) as f64 * h;
    let hi = ((best_j + 1) as f64 * h).min(mu_tau);
    let (arg, val) = golden_section_min(f, lo, hi, opts.min_rel_tol);
    if val < best {
        Ok((val, arg))
    } else {
        Ok((best, best_j as f64 * h))
    }
}

fn golden_section_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, rel_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - inv_phi * (b - a);
    let mut x2 = a + inv_phi * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..200 {
        if (b - a) <= rel_tol * b.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// `b / (1 + m_tau)`.
pub fn chi_star(p: &ModelParams) -> Result<f64> {
    Ok(p.b / (1.0 + m_tau(p.a, p.tau)?))
}

/// A root of `G2(mu) = (b - chi)/chi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Crossing {
    pub mu: f64,
    /// `dG2/dmu` at the root; near-zero slopes indicate a double root.
    pub slope: f64,
    pub double_root: bool,
}

/// The admissible speed window and the quantities it is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedRange {
    pub mu_tau: f64,
    pub m_tau: f64,
    pub chi_star: f64,
    /// Infimum of the wave numbers where both constraints hold strictly.
    pub mu_tilde_star2: f64,
    pub crossings: Vec<Crossing>,
    pub mu_star: f64,
    pub mu_star2: f64,
    pub c_star: f64,
    /// `+inf` when `mu_star2 == 0`.
    pub c_star2: f64,
    pub unbounded: bool,
    /// Set when the crossing scan found nothing although `G2 -> inf` at `0+`
    /// forces at least one root.
    pub inconsistent: bool,
}

impl SpeedRange {
    pub fn contains_speed(&self, c: f64) -> bool {
        c > self.c_star && c < self.c_star2
    }

    /// Speed whose wave number is the midpoint of `(mu_star2, mu_star)`.
    pub fn mid_wave_number_speed(&self, a: f64) -> f64 {
        let mu = 0.5 * (self.mu_star2 + self.mu_star);
        mu + a / mu
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bisection for the boundary between a failing `lo` and a passing `hi`.
fn bisect_predicate(pass: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pass(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The admissible window with default scan options.
pub fn admissible_window(p: &ModelParams) -> Result<SpeedRange> {
    admissible_window_with(p, ScanOptions::default())
}

pub fn admissible_window_with(p: &ModelParams, opts: ScanOptions) -> Result<SpeedRange> {
    p.validate()?;
    let (a, tau) = (p.a, p.tau);
    let (m, _) = m_tau_with(a, tau, opts)?;
    let chi_star = p.b / (1.0 + m);
    if !(p.chi > 0.0 && p.chi < chi_star) {
        return Err(Error::WindowUndefined { chi: p.chi, chi_star });
    }
    let mu_tau = mu_max(a, tau)?;
    let rhs = p.constraint_rhs();
    let n = opts.cells.max(4);
    let h = mu_tau / n as f64;
    let grid = |j: usize| j as f64 * h;
    let excess = |mu: f64| g2_raw(mu, a, tau) - rhs;
    let strict = |mu: f64| max_constraint_raw(mu, a, tau) < rhs;

    // Roots of G2 = rhs in (0, mu_tau).
    let mut roots = Vec::new();
    let first = excess(grid(1));
    if first < 0.0 {
        // G2 blows up at 0+, so a root hides below the first grid point.
        let mut lo = grid(1);
        let mut found = false;
        for _ in 0..1100 {
            lo *= 0.5;
            if lo == 0.0 {
                break;
            }
            if excess(lo) > 0.0 {
                found = true;
                break;
            }
        }
        if found {
            roots.push(bisect(excess, lo, lo * 2.0, opts.root_tol.min(lo * 1e-6)));
        }
    }
    let mut prev = first;
    for j in 1..n {
        let mu = grid(j);
        let cur = if j == 1 { first } else { excess(mu) };
        if cur == 0.0 {
            roots.push(mu);
        } else if j > 1 && prev != 0.0 && (prev > 0.0) != (cur > 0.0) {
            roots.push(bisect(excess, grid(j - 1), mu, opts.root_tol));
        }
        prev = cur;
    }
    // Last cell up to mu_tau, where G2 may be +inf.
    let at_end = excess(mu_tau);
    if prev != 0.0 && (prev > 0.0) != (at_end > 0.0) {
        roots.push(bisect(excess, grid(n - 1), mu_tau, opts.root_tol));
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|x, y| (*x - *y).abs() <= 4.0 * opts.root_tol);

    let crossings: Vec<Crossing> = roots
        .iter()
        .map(|&mu| {
            let step = (mu * 1e-6).max(1e-12).min(0.5 * (mu_tau - mu).max(1e-14));
            let slope = (g2_raw(mu + step, a, tau) - g2_raw(mu - step, a, tau)) / (2.0 * step);
            Crossing {
                mu,
                slope,
                double_root: slope.abs() < 1e-8,
            }
        })
        .collect();

    // Infimum of the strictly admissible set.
    let first_ok = (1..n).find(|&j| strict(grid(j)));
    let mu_tilde_star2 = match first_ok {
        Some(j) => bisect_predicate(strict, grid(j - 1), grid(j), opts.root_tol),
        None => return Err(Error::WindowUndefined { chi: p.chi, chi_star }),
    };

    let mut inconsistent = false;
    let (mu_star, mu_star2) = if roots.is_empty() {
        inconsistent = true;
        (mu_tau, 0.0)
    } else {
        // Endpoints mu^0 = 0 < mu^1 < ... < mu^n < mu^{n+1} = mu_tau.
        let mut ends = Vec::with_capacity(roots.len() + 2);
        ends.push(0.0);
        ends.extend_from_slice(&roots);
        ends.push(mu_tau);
        let below = |i: usize| excess(0.5 * (ends[i] + ends[i + 1])) < 0.0;
        let i_star = (1..=roots.len())
            .rev()
            .find(|&i| below(i) && mu_tilde_star2 <= ends[i + 1])
            .ok_or_else(|| {
                Error::Inadmissible(format!(
                    "no sub-threshold interval of G2 ending beyond {mu_tilde_star2}"
                ))
            })?;
        let mu_star = ends[i_star + 1];
        // Walk left across tangential touches where G2 stays below rhs.
        let mut k = i_star;
        while k >= 2 && excess(0.5 * (ends[k - 1] + ends[k])) <= 0.0 {
            k -= 1;
        }
        (mu_star, ends[k].max(mu_tilde_star2))
    };

    let c_star = mu_star + a / mu_star;
    let (c_star2, unbounded) = if mu_star2 > 0.0 {
        (mu_star2 + a / mu_star2, false)
    } else {
        (f64::INFINITY, true)
    };

    Ok(SpeedRange {
        mu_tau,
        m_tau: m,
        chi_star,
        mu_tilde_star2,
        crossings,
        mu_star,
        mu_star2,
        c_star,
        c_star2,
        unbounded,
        inconsistent,
    })
}

/// The unique root of `mu + a/mu = c` in `(0, mu_tau)`.
pub fn mu_from_speed(c: f64, p: &ModelParams) -> Result<f64> {
    let a = p.a;
    let disc = c * c - 4.0 * a;
    if !c.is_finite() || c < 2.0 * a.sqrt() || disc < 0.0 {
        return Err(Error::NoRoot {
            c,
            reason: format!("speed below the minimal speed 2 sqrt(a) = {}", 2.0 * a.sqrt()),
        });
    }
    // Stable form of (c - sqrt(c^2 - 4a))/2.
    let mu = 2.0 * a / (c + disc.sqrt());
    let mu_tau = mu_max(a, p.tau)?;
    if !(mu < mu_tau) {
        return Err(Error::NoRoot {
            c,
            reason: format!("speed must exceed c(mu_tau) = {}", mu_tau + a / mu_tau),
        });
    }
    Ok(mu)
}

/// The explicit sufficient bound on `chi` below which `c* = 2 sqrt(a)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SufficientChi {
    /// Bound evaluated with `1 + 2 tau a - a` and `a (1 + 2 tau)`, i.e. the
    /// two constraints evaluated exactly at `mu = sqrt(a)`.
    pub bound: f64,
    /// The same bound with the numerator read as `a (1 + 2)`.
    pub literal_bound: f64,
}

pub fn sufficient_chi(p: &ModelParams) -> Result<SufficientChi> {
    p.validate()?;
    let (a, tau, b) = (p.a, p.tau, p.b);
    let threshold = {
        let pos = (1.0 - tau).max(0.0);
        if pos == 0.0 {
            f64::INFINITY
        } else {
            (1.0 + tau * a) / pos
        }
    };
    if !(a < threshold) {
        return Err(Error::NotApplicable(format!(
            "requires a < (1 + tau a)/(1 - tau)_+ = {threshold}"
        )));
    }
    let sa = a.sqrt();
    let d = 1.0 + 2.0 * tau * a - a;
    let first = 1.0 + 2.0 * tau * sa;
    let corrected = sa * (1.0 + 2.0 * tau) / d.sqrt() + a * (1.0 + 2.0 * tau) / d;
    let literal = sa * (1.0 + 2.0 * tau) / d.sqrt() + a * 3.0 / d;
    Ok(SufficientChi {
        bound: b / (1.0 + first.max(corrected)),
        literal_bound: b / (1.0 + first.max(literal)),
    })
}
