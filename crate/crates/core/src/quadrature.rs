//! Gauss–Laguerre rules for `∫_0^∞ e^{-s} f(s) ds`.

/// Nodes and weights of the `n`-point Gauss–Laguerre rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    /// Newton iteration on `L_n` from asymptotic initial guesses, with the
    /// weights `x_i / ((n+1)^2 L_{n+1}(x_i)^2)`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Laguerre rule needs at least one node");
        let nf = n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut z = 0.0f64;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut dp = 0.0;
            let mut p2;
            for _ in 0..100 {
                let mut p1 = 1.0;
                p2 = 0.0;
                for j in 0..n {
                    let jf = j as f64;
                    let p3 = p2;
                    p2 = p1;
                    p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
                }
                dp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / dp;
                if (z - z1).abs() <= 1e-14 * z.abs() {
                    break;
                }
            }
            nodes.push(z);
            // With L_n'(z) = dp, w = 1/(z L_n'(z)^2).
            weights.push(1.0 / (z * dp * dp));
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomial_moments_exactly() {
        let q = GaussLaguerre::new(16);
        // ∫ e^{-s} s^k ds = k!
        let mut fact = 1.0;
        for k in 0..20u32 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = q.integrate(|s| s.powi(k as i32));
            assert!((got - fact).abs() <= 1e-10 * fact, "k={k}: {got} vs {fact}");
        }
    }

    #[test]
    fn weights_sum_to_one_for_64_nodes() {
        let q = GaussLaguerre::new(64);
        let s: f64 = q.weights.iter().sum();
        assert!((s - 1.0).abs() < 1e-13);
        assert!(q.nodes.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn integrates_smooth_non_polynomial() {
        let q = GaussLaguerre::new(64);
        // ∫ e^{-s} e^{-s} ds = 1/2 and ∫ e^{-s} cos s ds = 1/2.
        assert!((q.integrate(|s| (-s).exp()) - 0.5).abs() < 1e-12);
        assert!((q.integrate(f64::cos) - 0.5).abs() < 1e-10);
    }
}
