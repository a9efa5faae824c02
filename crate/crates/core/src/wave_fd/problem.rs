use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_weights::SpaceTimeGrid;

/// A scalar function of `(t, x)`.
pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// Tolerance on the corner compatibility `f_boundary(0) = w0(boundary)`.
pub const CORNER_TOL: f64 = 1e-8;

pub fn constant_fn(v: f64) -> ScalarFn {
    Arc::new(move |_, _| v)
}

/// Everything in the direct problem except the potential: interior source,
/// Dirichlet data at both ends, initial displacement and velocity.
#[derive(Clone)]
pub struct WaveData {
    pub source: ScalarFn,
    pub left: ScalarFn,
    pub right: ScalarFn,
    pub w0: ScalarFn,
    pub w1: ScalarFn,
}

impl fmt::Debug for WaveData {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WaveData").finish_non_exhaustive()
    }
}

impl WaveData {
    /// Baseline data: `f = 0`, boundary value 2, `w0 = 2 + sin(pi x)`, `w1 = 0`.
    pub fn baseline() -> Self {
        Self {
            source: constant_fn(0.0),
            left: constant_fn(2.0),
            right: constant_fn(2.0),
            w0: Arc::new(|_, x| 2.0 + (std::f64::consts::PI * x).sin()),
            w1: constant_fn(0.0),
        }
    }

    pub fn check_compatibility(&self, length: f64) -> Result<()> {
        let left_gap = (self.left.as_ref()(0.0, 0.0) - self.w0.as_ref()(0.0, 0.0)).abs();
        let right_gap = (self.right.as_ref()(0.0, length) - self.w0.as_ref()(0.0, length)).abs();
        if left_gap > CORNER_TOL || right_gap > CORNER_TOL {
            return Err(Error::InvalidParameter(format!(
                "boundary data incompatible with w0 at t = 0 (gaps {left_gap:e}, {right_gap:e})"
            )));
        }
        Ok(())
    }

    /// `w0` at the interior nodes of `grid`.
    pub fn initial_displacement(&self, grid: &SpaceTimeGrid) -> Vec<f64> {
        grid.interior_positions().iter().map(|&x| self.w0.as_ref()(0.0, x)).collect()
    }
}

/// Nodal potential on the interior nodes with its a priori bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialField {
    pub values: Vec<f64>,
    pub bound: f64,
}

impl PotentialField {
    pub fn new(values: Vec<f64>, bound: f64) -> Self {
        Self { values, bound }
    }

    pub fn zeros(len: usize, bound: f64) -> Self {
        Self { values: vec![0.0; len], bound }
    }

    /// Samples `q(x)` at the interior nodes of `grid`.
    pub fn sample(grid: &SpaceTimeGrid, bound: f64, q: impl Fn(f64) -> f64) -> Self {
        Self { values: grid.interior_positions().into_iter().map(q).collect(), bound }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn l2_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn within_bound(&self) -> bool {
        self.sup_norm() <= self.bound
    }
}
