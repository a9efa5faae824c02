//! Reconstruction of the potential `Q(x)` in `W_tt - W_xx + Q W = f` on `(0, L) x (0, T)`
//! from the flux `W_x(t, L)`, by a fixed-point iteration whose every step minimises a
//! Carleman-weighted quadratic functional.

pub mod conjugate_system;
pub mod error;
pub mod expr;
pub mod field;
pub mod grid_weights;
pub mod inversion;
pub mod measurement;
pub mod parallel;
pub mod wave_fd;

pub use error::{Error, Result};
