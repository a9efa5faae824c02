use super::problem::{PotentialField, WaveData};
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::grid_weights::SpaceTimeGrid;

/// Space-time field `w_j^n`, `j = 0..=N+1`, `n = 0..=Nt`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: SpaceTimeGrid,
    pub values: SpaceTimeField,
}

impl Trajectory {
    pub fn get(&self, n: usize, j: usize) -> f64 {
        self.values.get(n, j)
    }
}

/// Constant tridiagonal system `diag x_i + off (x_{i-1} + x_{i+1}) = r_i`,
/// factored once (Thomas algorithm).
struct ConstTridiag {
    inv_pivot: Vec<f64>,
    upper: Vec<f64>,
    off: f64,
}

impl ConstTridiag {
    fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut inv_pivot = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut pivot = diag;
        inv_pivot[0] = 1.0 / pivot;
        upper[0] = off / pivot;
        for i in 1..n {
            pivot = diag - off * upper[i - 1];
            inv_pivot[i] = 1.0 / pivot;
            upper[i] = off / pivot;
        }
        Self { inv_pivot, upper, off }
    }

    fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.off * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}

/// Largest stable Courant number of the theta-scheme, `None` when unconditionally stable.
pub fn stability_limit(theta: f64) -> Option<f64> {
    if theta >= 0.25 {
        None
    } else {
        Some((1.0 / (1.0 - 4.0 * theta)).sqrt())
    }
}

/// Time-steps `(w^{n+1} - 2 w^n + w^{n-1}) / tau^2 = Delta_h [theta w^{n+1} + (1 - 2 theta) w^n + theta w^{n-1}]
/// - q w^n + f^n` on the interior nodes, with Dirichlet rows taken from the boundary data
/// and a second-order Taylor start `w^1 = w^0 + tau w_1 + tau^2 / 2 (Delta_h w^0 - q w^0 + f^0)`.
pub fn solve_wave(data: &WaveData, q: &PotentialField, grid: &SpaceTimeGrid, theta: f64) -> Result<Trajectory> {
    let n_int = grid.interior();
    if q.len() != n_int {
        return Err(Error::ShapeMismatch { expected: format!("{n_int} potential values"), got: format!("{}", q.len()) });
    }
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta must lie in [0, 1], got {theta}")));
    }
    if let Some(limit) = stability_limit(theta) {
        if grid.cfl() > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { cfl: grid.cfl() });
        }
    }
    data.check_compatibility(grid.length())?;

    let (h, tau) = (grid.h(), grid.tau());
    let (h2, tau2) = (h * h, tau * tau);
    let steps = grid.steps();
    let width = grid.nodes();
    let xs = grid.positions();
    let qv = &q.values;
    let mut w = SpaceTimeField::zeros(steps + 1, width);

    for n in 0..=steps {
        let t = grid.t(n);
        w.set(n, 0, data.left.as_ref()(t, 0.0));
        w.set(n, width - 1, data.right.as_ref()(t, grid.length()));
    }
    for j in 1..=n_int {
        w.set(0, j, data.w0.as_ref()(0.0, xs[j]));
    }

    let lap = |row: &[f64], j: usize| (row[j + 1] - 2.0 * row[j] + row[j - 1]) / h2;

    {
        let (prev, next) = w.as_mut_slice().split_at_mut(width);
        let w0 = &*prev;
        let w1 = &mut next[..width];
        for j in 1..=n_int {
            let x = xs[j];
            let acc = lap(w0, j) - qv[j - 1] * w0[j] + data.source.as_ref()(0.0, x);
            w1[j] = w0[j] + tau * data.w1.as_ref()(0.0, x) + 0.5 * tau2 * acc;
        }
    }
    check_row(w.row(1), 1)?;

    let implicit = theta > 0.0;
    let tri = if implicit { Some(ConstTridiag::new(n_int, 1.0 / tau2 + 2.0 * theta / h2, -theta / h2)) } else { None };
    let mut rhs = vec![0.0; n_int];

    for n in 1..steps {
        let t = grid.t(n);
        let (before, after) = w.as_mut_slice().split_at_mut((n + 1) * width);
        let prev = &before[(n - 1) * width..n * width];
        let cur = &before[n * width..(n + 1) * width];
        let next = &mut after[..width];
        match &tri {
            None => {
                for j in 1..=n_int {
                    let acc = lap(cur, j) - qv[j - 1] * cur[j] + data.source.as_ref()(t, xs[j]);
                    next[j] = 2.0 * cur[j] - prev[j] + tau2 * acc;
                }
            }
            Some(tri) => {
                for j in 1..=n_int {
                    rhs[j - 1] = (2.0 * cur[j] - prev[j]) / tau2
                        + (1.0 - 2.0 * theta) * lap(cur, j)
                        + theta * lap(prev, j)
                        - qv[j - 1] * cur[j]
                        + data.source.as_ref()(t, xs[j]);
                }
                rhs[0] += theta * next[0] / h2;
                rhs[n_int - 1] += theta * next[width - 1] / h2;
                tri.solve_in_place(&mut rhs);
                next[1..=n_int].copy_from_slice(&rhs);
            }
        }
        check_row(next, n + 1)?;
    }
    Ok(Trajectory { grid: *grid, values: w })
}

fn check_row(row: &[f64], step: usize) -> Result<()> {
    if row.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { step })
    }
}
