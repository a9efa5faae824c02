use serde::{Deserialize, Serialize};

use super::solver::Trajectory;
use crate::error::{Error, Result};

/// Relative slack allowed when a resampling target sits just outside the source window.
const RANGE_SLACK: f64 = 1e-9;

/// A uniformly sampled time series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl FluxSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} values", times.len()),
                got: format!("{}", values.len()),
            });
        }
        if times.len() < 2 {
            return Err(Error::SeriesTooShort { needed: 2, got: times.len() });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("series times must be strictly increasing".into()));
        }
        Ok(Self { times, values })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn step(&self) -> f64 {
        self.times[1] - self.times[0]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn map(&self, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = self.times.iter().zip(&self.values).map(|(&t, &v)| f(t, v)).collect();
        Self { times: self.times.clone(), values }
    }

    /// Pointwise difference `self - other` on identical time stamps.
    pub fn minus(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::ShapeMismatch { expected: format!("{}", self.len()), got: format!("{}", other.len()) });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(Self { times: self.times.clone(), values })
    }
}

/// One-sided flux `(w_{N+1} - w_N) / h` at the right end, one value per time level.
pub fn extract_flux(trajectory: &Trajectory) -> FluxSeries {
    let grid = &trajectory.grid;
    let last = grid.nodes() - 1;
    let values = (0..=grid.steps())
        .map(|n| (trajectory.get(n, last) - trajectory.get(n, last - 1)) / grid.h())
        .collect();
    FluxSeries { times: grid.times(), values }
}

/// Second-order time derivative: centred inside, three-point one-sided at both ends.
pub fn time_derivative(series: &FluxSeries) -> Result<FluxSeries> {
    let m = &series.values;
    let len = m.len();
    if len < 3 {
        return Err(Error::SeriesTooShort { needed: 3, got: len });
    }
    let tau = series.step();
    let mut d = vec![0.0; len];
    d[0] = (-3.0 * m[0] + 4.0 * m[1] - m[2]) / (2.0 * tau);
    for n in 1..len - 1 {
        d[n] = (m[n + 1] - m[n - 1]) / (2.0 * tau);
    }
    d[len - 1] = (3.0 * m[len - 1] - 4.0 * m[len - 2] + m[len - 3]) / (2.0 * tau);
    Ok(FluxSeries { times: series.times.clone(), values: d })
}

/// Linear interpolation of `series` onto `targets`.
pub fn resample(series: &FluxSeries, targets: &[f64]) -> Result<FluxSeries> {
    let (start, end) = (series.times[0], *series.times.last().unwrap());
    let slack = RANGE_SLACK * (end - start).abs().max(1.0);
    if let (Some(&lo), Some(&hi)) = (targets.first(), targets.last()) {
        if lo < start - slack || hi > end + slack {
            return Err(Error::ResampleRange { source_start: start, source_end: end, target_start: lo, target_end: hi });
        }
    }
    let ts = &series.times;
    let vs = &series.values;
    let mut k = 0;
    let values = targets
        .iter()
        .map(|&t| {
            let t = t.clamp(start, end);
            while k + 2 < ts.len() && ts[k + 1] < t {
                k += 1;
            }
            while k > 0 && ts[k] > t {
                k -= 1;
            }
            let r = (t - ts[k]) / (ts[k + 1] - ts[k]);
            vs[k] + r * (vs[k + 1] - vs[k])
        })
        .collect();
    Ok(FluxSeries { times: targets.to_vec(), values })
}
