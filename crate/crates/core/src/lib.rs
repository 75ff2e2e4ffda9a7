//! Traveling waves of the parabolic–parabolic chemotaxis system with logistic
//! source,
//!
//! ```text
//! u_t = u_xx - chi (u v_x)_x + u (a - b u)
//! tau v_t = v_xx - v + u
//! ```
//!
//! studied in the frame moving with speed `c`. The crate computes the
//! admissible speed window and chemotaxis threshold, builds the
//! sub/super-solution envelope, constructs wave profiles by monotone
//! parabolic iteration plus an outer fixed point, runs the coupled evolution,
//! and produces principal-eigenvalue certificates ruling out slow waves.

// Input checks are written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod envelope;
pub mod error;
pub mod field;
pub mod grid;
pub mod params;
pub mod quadrature;
pub mod run;
pub mod spectra;
pub mod tridiag;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Grid, Profile};
pub use params::{ModelParams, SpeedRange, WaveNumbers};
