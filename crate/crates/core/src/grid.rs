use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid on `[x_min, x_max]` with `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
    pub dx: f64,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::Grid(format!("need at least 3 points, got {n}")));
        }
        if !(x_min.is_finite() && x_max.is_finite()) || x_max <= x_min {
            return Err(Error::Grid(format!("bad interval [{x_min}, {x_max}]")));
        }
        Ok(Self {
            x_min,
            x_max,
            n,
            dx: (x_max - x_min) / (n - 1) as f64,
        })
    }

    /// Grid whose spacing is the largest value not exceeding `dx` that
    /// divides the interval evenly.
    pub fn with_spacing(x_min: f64, x_max: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) {
            return Err(Error::Grid(format!("spacing must be positive, got {dx}")));
        }
        let cells = ((x_max - x_min) / dx - 1e-9).ceil().max(2.0) as usize;
        Self::new(x_min, x_max, cells + 1)
    }

    /// The grid with every cell halved.
    pub fn refined(&self) -> Self {
        Self::new(self.x_min, self.x_max, 2 * (self.n - 1) + 1).expect("refinement of a valid grid")
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx
        }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i)).collect()
    }

    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    /// Index of the last grid point not to the right of `x` (clamped).
    pub fn index_below(&self, x: f64) -> usize {
        let s = ((x - self.x_min) / self.dx).floor();
        if s <= 0.0 {
            0
        } else {
            (s as usize).min(self.n - 1)
        }
    }
}

/// A real function sampled on a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub grid: Grid,
    pub values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Grid(format!(
                "profile has {} values for a grid of {} points",
                values.len(),
                grid.n
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Grid(format!("non-finite value at index {i}")));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = (0..grid.n).map(|i| f(grid.x(i))).collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, k: f64) -> Self {
        Self {
            grid,
            values: vec![k; grid.n],
        }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dx(&self) -> f64 {
        self.grid.dx
    }

    pub fn x(&self, i: usize) -> f64 {
        self.grid.x(i)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `sup |self - other|`; both profiles must share a grid length.
    pub fn sup_distance(&self, other: &Profile) -> f64 {
        debug_assert_eq!(self.len(), other.len());
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Profile {
        Profile {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Profile {
        debug_assert_eq!(self.len(), other.len());
        Profile {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    /// Linear interpolation, continued by the endpoint values outside the
    /// grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let g = &self.grid;
        if x <= g.x_min {
            return self.values[0];
        }
        if x >= g.x_max {
            return self.values[g.n - 1];
        }
        let s = (x - g.x_min) / g.dx;
        let i = (s.floor() as usize).min(g.n - 2);
        let w = s - i as f64;
        (1.0 - w) * self.values[i] + w * self.values[i + 1]
    }

    /// Resample onto another grid by linear interpolation.
    pub fn resample(&self, grid: Grid) -> Profile {
        Profile::from_fn(grid, |x| self.interpolate(x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_basics() {
        let g = Grid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.dx, 0.5);
        assert_eq!(g.points(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        let r = g.refined();
        assert_eq!(r.n, 9);
        assert_eq!(r.dx, 0.25);
        let s = Grid::with_spacing(-40.0, 40.0, 0.02).unwrap();
        assert_eq!(s.n, 4001);
    }

    #[test]
    fn interpolation_is_exact_for_linear_and_constant_outside() {
        let g = Grid::new(0.0, 2.0, 11).unwrap();
        let p = Profile::from_fn(g, |x| 3.0 * x - 1.0);
        assert!((p.interpolate(0.73) - 1.19).abs() < 1e-12);
        assert_eq!(p.interpolate(-5.0), -1.0);
        assert_eq!(p.interpolate(9.0), 5.0);
    }

    #[test]
    fn profile_rejects_bad_values() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        assert!(Profile::new(g, vec![0.0, 1.0]).is_err());
        assert!(Profile::new(g, vec![0.0, f64::NAN, 1.0]).is_err());
    }
}
