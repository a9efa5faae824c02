//! Theta-scheme for `w_tt - w_xx + q w = f` with Dirichlet data, plus flux extraction.

mod io;
mod problem;
mod series;
mod solver;

pub use io::{fmt_f64, read_columns, read_series, write_columns, write_series};
pub use problem::{constant_fn, PotentialField, ScalarFn, WaveData, CORNER_TOL};
pub use series::{extract_flux, resample, time_derivative, FluxSeries};
pub use solver::{solve_wave, stability_limit, Trajectory};
