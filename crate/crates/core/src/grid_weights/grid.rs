use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform space mesh `x_j = j h`, `j = 0..=N+1`, and uniform time mesh
/// `t^n = n tau`, `n = 0..=Nt`, with `Nt tau >= T > (Nt - 1) tau`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeGrid {
    length: f64,
    final_time: f64,
    interior: usize,
    h: f64,
    tau: f64,
    steps: usize,
}

impl SpaceTimeGrid {
    /// Builds a grid from the number of interior space nodes and the time step.
    pub fn new(length: f64, final_time: f64, interior: usize, tau: f64) -> Result<Self> {
        if !(length > 0.0 && length.is_finite()) {
            return Err(Error::InvalidParameter(format!("domain length must be positive, got {length}")));
        }
        if !(final_time > 0.0 && final_time.is_finite()) {
            return Err(Error::InvalidParameter(format!("final time must be positive, got {final_time}")));
        }
        if interior < 2 {
            return Err(Error::InvalidParameter(format!("need at least 2 interior nodes, got {interior}")));
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau}")));
        }
        let h = length / (interior + 1) as f64;
        // Nt = ceil(T / tau), with a relative slack so that T = 130 * 0.01 gives 130.
        let ratio = final_time / tau;
        let mut steps = ratio.ceil() as usize;
        if steps > 1 && (ratio - (steps - 1) as f64) <= 1e-9 * ratio {
            steps -= 1;
        }
        let steps = steps.max(1);
        Ok(Self { length, final_time, interior, h, tau, steps })
    }

    /// Builds a grid with space step as close as possible to `tau / cfl`.
    pub fn with_cfl(length: f64, final_time: f64, tau: f64, cfl: f64) -> Result<Self> {
        if !(cfl > 0.0 && cfl.is_finite()) {
            return Err(Error::InvalidParameter(format!("cfl must be positive, got {cfl}")));
        }
        let cells = (length * cfl / tau).round().max(3.0) as usize;
        Self::new(length, final_time, cells - 1, tau)
    }

    /// Builds a grid from the requested space and time steps.
    pub fn with_steps(length: f64, final_time: f64, h: f64, tau: f64) -> Result<Self> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidParameter(format!("space step must be positive, got {h}")));
        }
        let cells = (length / h).round().max(3.0) as usize;
        Self::new(length, final_time, cells - 1, tau)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn final_time(&self) -> f64 {
        self.final_time
    }

    /// Number of interior space nodes `N`.
    pub fn interior(&self) -> usize {
        self.interior
    }

    /// Number of space nodes including both boundaries, `N + 2`.
    pub fn nodes(&self) -> usize {
        self.interior + 2
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Number of time steps `Nt`; there are `Nt + 1` time levels.
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cfl(&self) -> f64 {
        self.tau / self.h
    }

    pub fn x(&self, j: usize) -> f64 {
        if j == self.interior + 1 {
            self.length
        } else {
            j as f64 * self.h
        }
    }

    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|n| self.t(n)).collect()
    }

    /// Interior node positions `x_1..x_N`.
    pub fn interior_positions(&self) -> Vec<f64> {
        (1..=self.interior).map(|j| self.x(j)).collect()
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.nodes()).map(|j| self.x(j)).collect()
    }

    /// Time of the last level, `Nt tau >= T`.
    pub fn end_time(&self) -> f64 {
        self.t(self.steps)
    }
}
