use crate::error::{Error, Result};
use crate::grid_weights::{CarlemanWeight, CutoffFamily, SpaceTimeGrid};
use crate::wave_fd::FluxSeries;

/// Block targets `mu_j(t^n) = eta_j(phi(t^n, L)) mu(t^n)` for `j = 1..=Ncut`.
///
/// `eta_0(phi(t, L)) = eta(-beta t^2)` vanishes identically, so block 0 is not stored.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockTargets {
    pub times: Vec<f64>,
    /// `blocks[j - 1][n]`.
    pub blocks: Vec<Vec<f64>>,
}

impl BlockTargets {
    pub fn count(&self) -> usize {
        self.blocks.len()
    }

    /// `j` of a stored block index.
    pub fn block_index(&self, k: usize) -> usize {
        k + 1
    }

    pub fn is_zero(&self, k: usize) -> bool {
        self.blocks[k].iter().all(|&v| v == 0.0)
    }

    /// Time levels on which block `k` is nonzero.
    pub fn support(&self, k: usize) -> Vec<usize> {
        self.blocks[k].iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(n, _)| n).collect()
    }

    pub fn sum(&self) -> Vec<f64> {
        let mut total = vec![0.0; self.times.len()];
        for b in &self.blocks {
            total.iter_mut().zip(b).for_each(|(t, v)| *t += v);
        }
        total
    }
}

pub fn assemble_target(
    mu_source: &FluxSeries,
    weight: &CarlemanWeight,
    cut: &CutoffFamily,
    grid: &SpaceTimeGrid,
) -> Result<BlockTargets> {
    if mu_source.len() != grid.steps() + 1 {
        return Err(Error::ShapeMismatch {
            expected: format!("{} time levels", grid.steps() + 1),
            got: format!("{}", mu_source.len()),
        });
    }
    let levels: Vec<f64> = mu_source.times.iter().map(|&t| weight.phi(t, grid.length())).collect();
    let blocks = (1..=cut.count())
        .map(|j| levels.iter().zip(&mu_source.values).map(|(&p, &mu)| cut.eta_j(j, p) * mu).collect())
        .collect();
    Ok(BlockTargets { times: mu_source.times.clone(), blocks })
}
