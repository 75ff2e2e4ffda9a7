use chemotaxis_waves::params::{
    admissible_window, chi_star, is_admissible, m_tau, mu_from_speed, mu_max, sufficient_chi, wave_speed,
};
use chemotaxis_waves::{Error, ModelParams};
use proptest::prelude::*;

/// `max{G1, G2}` written out from scratch.
fn constraint_max(mu: f64, a: f64, tau: f64) -> f64 {
    let c = mu + a / mu;
    let d = 1.0 + tau * mu * c - mu * mu;
    let g1 = 1.0 + tau * c;
    let g2 = (mu + tau * c) / d.sqrt() + mu * (mu + tau * c) / d;
    g1.max(g2)
}

/// Minimum of `max{G1, G2}` over a million equally spaced wave numbers.
fn brute_force_m_tau(a: f64, tau: f64) -> f64 {
    let upper = if tau >= 1.0 {
        a.sqrt()
    } else {
        a.sqrt().min(((1.0 + tau * a) / (1.0 - tau)).sqrt())
    };
    let n = 1_000_000;
    (1..n)
        .map(|k| constraint_max(upper * k as f64 / n as f64, a, tau))
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn m_tau_matches_brute_force_scan() {
    for (a, tau) in [(1.0, 0.5), (1.0, 0.1), (2.0, 0.3), (0.5, 0.8), (4.0, 1.5)] {
        let fast = m_tau(a, tau).unwrap();
        let brute = brute_force_m_tau(a, tau);
        // The scan samples the infimum from above.
        assert!(fast <= brute + 1e-9, "a={a} tau={tau}: {fast} vs {brute}");
        assert!(
            (fast - brute).abs() <= 1e-6 * brute,
            "a={a} tau={tau}: {fast} vs {brute}"
        );
    }
}

#[test]
fn m_tau_tends_to_one_as_tau_vanishes() {
    // At tau = 0, G1 = 1 and G2 -> 0 as mu -> 0, so the infimum is 1.
    let values: Vec<f64> = [1e-1, 1e-2, 1e-3, 1e-4]
        .iter()
        .map(|&tau| m_tau(1.0, tau).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
    assert!(values.iter().all(|&m| m > 1.0));
    assert!(values[3] - 1.0 < 5e-3, "{values:?}");
}

#[test]
fn window_is_undefined_without_or_with_strong_chemotaxis() {
    let p = ModelParams::new(1.0, 1.0, 0.0, 0.5).unwrap();
    assert!(matches!(admissible_window(&p), Err(Error::WindowUndefined { .. })));
    let strong = ModelParams::new(1.0, 1.0, 0.4, 0.5).unwrap();
    assert!(chi_star(&strong).unwrap() < 0.4);
    assert!(matches!(admissible_window(&strong), Err(Error::WindowUndefined { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn window_invariants(
        a in 0.2f64..4.0,
        b in 0.5f64..3.0,
        tau in 0.05f64..0.95,
        frac in 0.05f64..0.95,
    ) {
        let base = ModelParams::new(a, b, 0.0, tau).unwrap();
        let chi = frac * chi_star(&base).unwrap();
        let p = ModelParams { chi, ..base };
        let w = admissible_window(&p).unwrap();
        prop_assert!(w.chi_star < b / 2.0);
        prop_assert!(0.0 <= w.mu_star2 && w.mu_star2 < w.mu_star);
        prop_assert!(w.mu_star <= w.mu_tau * (1.0 + 1e-12));
        prop_assert!(w.c_star >= 2.0 * a.sqrt() * (1.0 - 1e-12));
        prop_assert!(w.c_star < w.c_star2);
        for k in 1..10 {
            let mu = w.mu_star2 + (w.mu_star - w.mu_star2) * k as f64 / 10.0;
            prop_assert!(is_admissible(mu, &p), "mu = {} not admissible", mu);
            prop_assert!(w.contains_speed(wave_speed(mu, a).unwrap()));
        }
    }

    #[test]
    fn speed_and_wave_number_roundtrip(a in 0.1f64..5.0, tau in 0.0f64..2.0, t in 0.01f64..0.99) {
        let p = ModelParams::new(a, 1.0, 0.0, tau).unwrap();
        let mu = t * mu_max(a, tau).unwrap();
        let c = wave_speed(mu, a).unwrap();
        let back = mu_from_speed(c, &p).unwrap();
        prop_assert!((back - mu).abs() <= 1e-10 * mu.max(1.0), "{} vs {}", back, mu);
    }

    #[test]
    fn sufficient_chi_is_below_threshold(a in 0.1f64..0.99, b in 0.5f64..3.0, tau in 0.05f64..0.95) {
        let p = ModelParams::new(a, b, 0.0, tau).unwrap();
        if let Ok(r) = sufficient_chi(&p) {
            let star = chi_star(&p).unwrap();
            prop_assert!(r.bound <= star * (1.0 + 1e-9), "bound {} > chi* {}", r.bound, star);
        }
    }
}
