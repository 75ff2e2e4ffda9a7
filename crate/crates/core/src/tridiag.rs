//! Thomas elimination for tridiagonal systems.

use crate::error::{Error, Result};

/// A tridiagonal matrix stored by diagonals. `lower[0]` and
/// `upper[n - 1]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(n: usize) -> Self {
        Self {
            lower: vec![0.0; n],
            diag: vec![0.0; n],
            upper: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `A x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.len()];
        let mut scratch = vec![0.0; self.len()];
        self.solve_into(rhs, &mut out, &mut scratch)?;
        Ok(out)
    }

    /// Solve without allocating; `scratch` must have the system length.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64], scratch: &mut [f64]) -> Result<()> {
        let n = self.len();
        assert!(rhs.len() == n && out.len() == n && scratch.len() == n);
        if n == 0 {
            return Ok(());
        }
        let mut beta = self.diag[0];
        if beta == 0.0 || !beta.is_finite() {
            return Err(Error::Singular(0));
        }
        out[0] = rhs[0] / beta;
        for i in 1..n {
            scratch[i] = self.upper[i - 1] / beta;
            beta = self.diag[i] - self.lower[i] * scratch[i];
            if beta == 0.0 || !beta.is_finite() {
                return Err(Error::Singular(i));
            }
            out[i] = (rhs[i] - self.lower[i] * out[i - 1]) / beta;
        }
        for i in (0..n - 1).rev() {
            out[i] -= scratch[i + 1] * out[i + 1];
        }
        Ok(())
    }
}
