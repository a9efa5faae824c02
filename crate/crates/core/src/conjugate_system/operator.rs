use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::grid_weights::{CarlemanWeight, SpaceTimeGrid};

/// Five-point stencil of the conjugated operator at one node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stencil {
    pub t_minus: f64,
    pub t_plus: f64,
    pub x_minus: f64,
    pub x_plus: f64,
    pub center: f64,
}

/// `e^{s phi} (Delta_tau - Delta_h + q) e^{-s phi}` on the space-time mesh.
///
/// Residual rows are `n = 1..Nt-1`, `j = 1..N`. Coefficients only involve exponent
/// differences between neighbouring nodes.
#[derive(Clone, Debug)]
pub struct ConjugateOperator {
    weight: CarlemanWeight,
    grid: SpaceTimeGrid,
    q: Vec<f64>,
}

impl ConjugateOperator {
    pub fn new(weight: CarlemanWeight, grid: SpaceTimeGrid, q: Vec<f64>) -> Result<Self> {
        if q.len() != grid.interior() {
            return Err(Error::ShapeMismatch { expected: format!("{} potential values", grid.interior()), got: format!("{}", q.len()) });
        }
        Ok(Self { weight, grid, q })
    }

    pub fn weight(&self) -> &CarlemanWeight {
        &self.weight
    }

    pub fn grid(&self) -> &SpaceTimeGrid {
        &self.grid
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn s(&self) -> f64 {
        self.weight.s()
    }

    /// `phi(t^n, x_j)`.
    pub fn phi(&self, n: usize, j: usize) -> f64 {
        self.weight.phi(self.grid.t(n), self.grid.x(j))
    }

    pub fn stencil(&self, n: usize, j: usize) -> Stencil {
        let s = self.s();
        let (tau2, h2) = (self.grid.tau().powi(2), self.grid.h().powi(2));
        let p = self.phi(n, j);
        let e = |m: usize, k: usize| (s * (p - self.phi(m, k))).exp();
        Stencil {
            t_minus: e(n - 1, j) / tau2,
            t_plus: e(n + 1, j) / tau2,
            x_minus: -e(n, j - 1) / h2,
            x_plus: -e(n, j + 1) / h2,
            center: -2.0 / tau2 + 2.0 / h2 + self.q[j - 1],
        }
    }

    fn check_shape(&self, y: &SpaceTimeField) -> Result<()> {
        let (levels, width) = (self.grid.steps() + 1, self.grid.nodes());
        if y.levels() != levels || y.width() != width {
            return Err(Error::ShapeMismatch { expected: format!("{levels} x {width}"), got: format!("{} x {}", y.levels(), y.width()) });
        }
        Ok(())
    }

    /// Conjugated residual; rows `0`, `Nt` and the boundary columns are left at zero.
    pub fn apply_l(&self, y: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_shape(y)?;
        let mut out = SpaceTimeField::zeros(y.levels(), y.width());
        for n in 1..self.grid.steps() {
            for j in 1..=self.grid.interior() {
                let c = self.stencil(n, j);
                let v = c.t_minus * y.get(n - 1, j)
                    + c.t_plus * y.get(n + 1, j)
                    + c.x_minus * y.get(n, j - 1)
                    + c.x_plus * y.get(n, j + 1)
                    + c.center * y.get(n, j);
                out.set(n, j, v);
            }
        }
        Ok(out)
    }

    /// Plain `(Delta_tau - Delta_h + q) z` on the same rows.
    pub fn apply_wave(&self, z: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_shape(z)?;
        let (tau2, h2) = (self.grid.tau().powi(2), self.grid.h().powi(2));
        let mut out = SpaceTimeField::zeros(z.levels(), z.width());
        for n in 1..self.grid.steps() {
            for j in 1..=self.grid.interior() {
                let v = (z.get(n + 1, j) - 2.0 * z.get(n, j) + z.get(n - 1, j)) / tau2
                    - (z.get(n, j + 1) - 2.0 * z.get(n, j) + z.get(n, j - 1)) / h2
                    + self.q[j - 1] * z.get(n, j);
                out.set(n, j, v);
            }
        }
        Ok(out)
    }

    /// Direct discretisation of the continuous conjugated operator with centred first differences.
    pub fn apply_l_naive(&self, y: &SpaceTimeField) -> Result<SpaceTimeField> {
        self.check_shape(y)?;
        let (s, beta, x0) = (self.s(), self.weight.beta(), self.weight.x0());
        let (tau, h) = (self.grid.tau(), self.grid.h());
        let mut out = self.apply_wave(y)?;
        for n in 1..self.grid.steps() {
            let t = self.grid.t(n);
            for j in 1..=self.grid.interior() {
                let x = self.grid.x(j);
                let dt = (y.get(n + 1, j) - y.get(n - 1, j)) / (2.0 * tau);
                let dx = (y.get(n, j + 1) - y.get(n, j - 1)) / (2.0 * h);
                let extra = 4.0 * s * beta * t * dt
                    + 4.0 * s * (x - x0) * dx
                    + 2.0 * s * (beta + 1.0) * y.get(n, j)
                    + 4.0 * s * s * (beta * beta * t * t - (x - x0).powi(2)) * y.get(n, j);
                out.set(n, j, out.get(n, j) + extra);
            }
        }
        Ok(out)
    }

    /// Largest relative gap between the stencil of [`apply_l`](Self::apply_l) and that of
    /// [`apply_l_naive`](Self::apply_l_naive), over all residual nodes.
    pub fn naive_coefficient_gap(&self) -> f64 {
        let (s, beta, x0) = (self.s(), self.weight.beta(), self.weight.x0());
        let (tau, h) = (self.grid.tau(), self.grid.h());
        let (tau2, h2) = (tau * tau, h * h);
        let mut gap = 0.0f64;
        for n in 1..self.grid.steps() {
            let t = self.grid.t(n);
            for j in 1..=self.grid.interior() {
                let x = self.grid.x(j);
                let c = self.stencil(n, j);
                let naive = Stencil {
                    t_minus: 1.0 / tau2 - 2.0 * s * beta * t / tau,
                    t_plus: 1.0 / tau2 + 2.0 * s * beta * t / tau,
                    x_minus: -1.0 / h2 - 2.0 * s * (x - x0) / h,
                    x_plus: -1.0 / h2 + 2.0 * s * (x - x0) / h,
                    center: -2.0 / tau2 + 2.0 / h2 + self.q[j - 1]
                        + 2.0 * s * (beta + 1.0)
                        + 4.0 * s * s * (beta * beta * t * t - (x - x0).powi(2)),
                };
                let rel = |a: f64, b: f64, scale: f64| (a - b).abs() / scale;
                gap = gap
                    .max(rel(c.t_minus, naive.t_minus, 1.0 / tau2))
                    .max(rel(c.t_plus, naive.t_plus, 1.0 / tau2))
                    .max(rel(c.x_minus, naive.x_minus, 1.0 / h2))
                    .max(rel(c.x_plus, naive.x_plus, 1.0 / h2))
                    .max(rel(c.t_minus + c.t_plus + c.x_minus + c.x_plus + c.center,
                             naive.t_minus + naive.t_plus + naive.x_minus + naive.x_plus + naive.center,
                             1.0 / tau2 + 1.0 / h2));
            }
        }
        gap
    }
}
