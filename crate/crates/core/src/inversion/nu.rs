use crate::field::SpaceTimeField;
use crate::grid_weights::{CarlemanWeight, CutoffFamily};
use crate::wave_fd::Trajectory;

/// `nu(n, j) = d_tau^+ d_h^+ (eta(phi) d_t w)` on cells `n = 0..Nt-1`, `j = 0..=N`.
///
/// `d_t w` is the centred difference inside and the three-point one-sided one at both ends.
pub fn compute_nu_tilde(w: &Trajectory, weight: &CarlemanWeight, cut: &CutoffFamily) -> SpaceTimeField {
    let grid = &w.grid;
    let (steps, width) = (grid.steps(), grid.nodes());
    let (tau, h) = (grid.tau(), grid.h());
    let wt = |n: usize, j: usize| -> f64 {
        let v = |m: usize| w.get(m, j);
        if n == 0 {
            (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * tau)
        } else if n == steps {
            (3.0 * v(steps) - 4.0 * v(steps - 1) + v(steps - 2)) / (2.0 * tau)
        } else {
            (v(n + 1) - v(n - 1)) / (2.0 * tau)
        }
    };
    let g = SpaceTimeField::from_fn(steps + 1, width, |n, j| {
        let eta = cut.eta(weight.phi(grid.t(n), grid.x(j)));
        if eta == 0.0 {
            0.0
        } else {
            eta * wt(n, j)
        }
    });
    SpaceTimeField::from_fn(steps, width - 1, |n, j| {
        (g.get(n + 1, j + 1) - g.get(n + 1, j) - g.get(n, j + 1) + g.get(n, j)) / (tau * h)
    })
}

/// Splits `nu` over the blocks by the level `phi(t^n, x_j)` of each cell's lower-left node:
/// block `j` takes levels in `[c_j, c_{j-1})`, the last block also takes negative levels
/// and the first block levels at or above `c_0`.
pub fn split_nu_by_level(nu: &SpaceTimeField, weight: &CarlemanWeight, cut: &CutoffFamily, t: impl Fn(usize) -> f64, x: impl Fn(usize) -> f64) -> Vec<SpaceTimeField> {
    let count = cut.count();
    let l0sq = weight.l0sq();
    let mut parts = vec![SpaceTimeField::zeros(nu.levels(), nu.width()); count];
    for n in 0..nu.levels() {
        for j in 0..nu.width() {
            let v = nu.get(n, j);
            if v == 0.0 {
                continue;
            }
            let level = weight.phi(t(n), x(j));
            // c_k = L0^2 (N - k) / N, so level in [c_k, c_{k-1}) means k = ceil(N (1 - level / L0^2)).
            let k = (count as f64 * (1.0 - level / l0sq)).ceil().clamp(1.0, count as f64) as usize;
            parts[k - 1].set(n, j, v);
        }
    }
    parts
}
