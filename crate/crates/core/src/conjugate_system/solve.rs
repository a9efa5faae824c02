use serde::{Deserialize, Serialize};

use super::band::{norm2, pcg, relative_residual, BandCholesky};
use super::system::{mixed_difference_row, QuadraticSystem};
use crate::error::{Error, Result};
use crate::field::SpaceTimeField;
use crate::parallel;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Required relative residual `||b - A Y|| / ||b||`.
    pub tol: f64,
    /// Iterative refinement sweeps after the direct solve.
    pub max_refine: usize,
    /// Iteration cap of the preconditioned CG fallback.
    pub pcg_max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_refine: 4, pcg_max_iter: 20_000 }
    }
}

/// Assembled system together with its Cholesky factor.
#[derive(Clone, Debug)]
pub struct FactoredSystem {
    pub system: QuadraticSystem,
    factor: BandCholesky,
    pub solver: SolverOptions,
}

impl FactoredSystem {
    pub fn new(system: QuadraticSystem, solver: SolverOptions) -> Result<Self> {
        let factor = system.matrix.cholesky()?;
        Ok(Self { system, factor, solver })
    }

    pub fn min_pivot(&self) -> f64 {
        self.factor.min_pivot()
    }

    /// Solves `A x = b` to the configured relative residual.
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, f64)> {
        let a = &self.system.matrix;
        if norm2(b) == 0.0 {
            return Ok((vec![0.0; b.len()], 0.0));
        }
        let mut x = self.factor.solve(b);
        let mut res = relative_residual(a, &x, b);
        let mut sweeps = 0;
        while res > self.solver.tol && sweeps < self.solver.max_refine {
            let ax = a.mul_vec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
            let dx = self.factor.solve(&r);
            x.iter_mut().zip(&dx).for_each(|(x, d)| *x += d);
            res = relative_residual(a, &x, b);
            sweeps += 1;
        }
        if res > self.solver.tol {
            let (r, _) = pcg(a, b, &mut x, self.solver.tol, self.solver.pcg_max_iter)?;
            res = r;
        }
        Ok((x, res))
    }
}

/// Right-hand side data of one block.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BlockRhs {
    /// Boundary target `mu_j(t^n)`, `n = 0..=Nt` (the `n = 0` entry is not used).
    pub boundary: Vec<f64>,
    /// Target of the high-frequency term on cells `(n, j)`, `n = 0..Nt-1`, `j = 0..=N`.
    pub penalty: Option<SpaceTimeField>,
}

impl BlockRhs {
    pub fn boundary_only(boundary: Vec<f64>) -> Self {
        Self { boundary, penalty: None }
    }

    fn penalty_nodes(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.penalty.iter().flat_map(|f| {
            (0..f.levels()).flat_map(move |n| (0..f.width()).map(move |j| (n, j, f.get(n, j)))).filter(|e| e.2 != 0.0)
        })
    }

    /// Largest weight level `phi` over the nodes where the block's data is nonzero.
    pub fn support_level(&self, sys: &QuadraticSystem) -> Option<f64> {
        let op = &sys.op;
        let n_int = sys.space.interior;
        let boundary = self
            .boundary
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, v)| **v != 0.0)
            .map(|(n, _)| op.phi(n, n_int));
        let penalty = self.penalty_nodes().map(|(n, j, _)| op.phi(n, j));
        boundary.chain(penalty).reduce(f64::max)
    }
}

/// Minimiser in the shifted conjugate scale `Y = e^{s (phi - shift)} Z`.
#[derive(Clone, Debug)]
pub struct MinimizerResult {
    pub y: SpaceTimeField,
    pub residual: f64,
    pub block_shift: f64,
}

/// `b(y) = s tau sum_n e^{s (phi(t^n, x_N) - shift)} mu(t^n) (-y_N^n / h)`
/// `     + s h^2 h tau sum e^{s (phi(t^n, x_j) - shift)} nu(n, j) (d_tau^+ d_h^+ y)(n, j)`.
pub fn block_rhs_vector(sys: &QuadraticSystem, rhs: &BlockRhs, shift: f64) -> Result<Vec<f64>> {
    let op = &sys.op;
    let grid = op.grid();
    let space = sys.space;
    let (h, tau, s) = (grid.h(), grid.tau(), op.s());
    if rhs.boundary.len() != space.steps + 1 {
        return Err(Error::ShapeMismatch { expected: format!("{} target values", space.steps + 1), got: format!("{}", rhs.boundary.len()) });
    }
    let mut b = vec![0.0; space.dim()];
    for n in 1..=space.steps {
        let mu = rhs.boundary[n];
        if mu != 0.0 {
            let i = space.index(n, space.interior).unwrap();
            b[i] += s * tau * (s * (op.phi(n, space.interior) - shift)).exp() * mu * (-1.0 / h);
        }
    }
    if let Some(nu) = &rhs.penalty {
        if nu.levels() != space.steps || nu.width() != space.interior + 1 {
            return Err(Error::ShapeMismatch {
                expected: format!("{} x {} penalty target", space.steps, space.interior + 1),
                got: format!("{} x {}", nu.levels(), nu.width()),
            });
        }
        let w = s * h * h * h * tau;
        for (n, j, v) in rhs.penalty_nodes() {
            let scaled = w * (s * (op.phi(n, j) - shift)).exp() * v;
            for (i, c) in mixed_difference_row(&space, n, j, tau, h) {
                b[i] += scaled * c;
            }
        }
    }
    Ok(b)
}

pub fn solve_min(fs: &FactoredSystem, rhs: &BlockRhs, shift: f64) -> Result<MinimizerResult> {
    let b = block_rhs_vector(&fs.system, rhs, shift)?;
    let (x, residual) = fs.solve(&b)?;
    Ok(MinimizerResult { y: fs.system.space.to_field(&x), residual, block_shift: shift })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Execution {
    Parallel,
    Sequential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSummary {
    pub shift: f64,
    pub residual: f64,
    pub skipped: bool,
}

#[derive(Clone, Debug)]
pub struct ProgressiveResult {
    /// Physical initial rate `d_t Z(0, x_j)`, `j = 1..=N`.
    pub rate: Vec<f64>,
    pub blocks: Vec<BlockSummary>,
    /// Per-block rates before summation, for diagnostics.
    pub block_rates: Vec<Vec<f64>>,
}

/// `d_t Z(0, x_j) ≈ e^{s (shift - phi(t^1, x_j))} Y^1_j / tau`.
pub fn initial_rate(fs: &FactoredSystem, result: &MinimizerResult) -> Vec<f64> {
    let op = &fs.system.op;
    let (s, tau) = (op.s(), op.grid().tau());
    (1..=fs.system.space.interior)
        .map(|j| {
            let y1 = result.y.get(1, j);
            if y1 == 0.0 {
                0.0
            } else {
                (s * (result.block_shift - op.phi(1, j))).exp() * y1 / tau
            }
        })
        .collect()
}

/// Solves every block against the shared factor and sums the physical initial rates.
pub fn progressive_minimize(fs: &FactoredSystem, blocks: &[BlockRhs], execution: Execution) -> Result<ProgressiveResult> {
    let solve_block = |rhs: &BlockRhs| -> Result<(BlockSummary, Vec<f64>)> {
        match rhs.support_level(&fs.system) {
            None => Ok((BlockSummary { shift: 0.0, residual: 0.0, skipped: true }, vec![0.0; fs.system.space.interior])),
            Some(shift) => {
                let m = solve_min(fs, rhs, shift)?;
                let rate = initial_rate(fs, &m);
                Ok((BlockSummary { shift, residual: m.residual, skipped: false }, rate))
            }
        }
    };
    let outcomes = match execution {
        Execution::Parallel => parallel::map(blocks, solve_block),
        Execution::Sequential => parallel::map_sequential(blocks, solve_block),
    };
    let mut rate = vec![0.0; fs.system.space.interior];
    let mut summaries = Vec::with_capacity(blocks.len());
    let mut block_rates = Vec::with_capacity(blocks.len());
    for outcome in outcomes {
        let (summary, r) = outcome?;
        rate.iter_mut().zip(&r).for_each(|(a, b)| *a += b);
        summaries.push(summary);
        block_rates.push(r);
    }
    Ok(ProgressiveResult { rate, blocks: summaries, block_rates })
}

/// Single unshifted solve for the summed target.
pub fn direct_minimize(fs: &FactoredSystem, rhs: &BlockRhs) -> Result<(Vec<f64>, MinimizerResult)> {
    let m = solve_min(fs, rhs, 0.0)?;
    Ok((initial_rate(fs, &m), m))
}
