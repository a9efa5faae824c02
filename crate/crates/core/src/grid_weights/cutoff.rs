//! Smooth master cut-off `eta` and the shifted-difference partition `eta_j` that
//! drives the progressive solver.
//!
//! `eta` is the normalized primitive of `f(t) = exp(-1 / (t (eps0 - t)))` on
//! `[0, eps0]`. For the default block count `eps0` is a few thousandths and `f`
//! underflows everywhere in double precision, so the integrand is evaluated as
//! `f(t) / f(eps0 / 2)`, whose logarithm is bounded above by zero. The primitive
//! is tabulated once over the left half of the interval and mirrored, which
//! makes `eta(eps0 / 2) = 1/2` exact.

use std::sync::Arc;

use serde::Serialize;

use super::weight::CarlemanWeight;
use crate::error::{Error, Result};

/// Minimum number of table cells over `[0, eps0 / 2]`.
const MIN_HALF_CELLS: usize = 1 << 14;
/// Upper bound on the table size so pathological `eps0` cannot exhaust memory.
const MAX_HALF_CELLS: usize = 1 << 22;

/// Tabulated master cut-off.
#[derive(Debug)]
pub struct MasterCutoff {
    eps0: f64,
    step: f64,
    values: Vec<f64>,
}

impl MasterCutoff {
    pub fn new(eps0: f64) -> Result<Self> {
        if !(eps0 > 0.0 && eps0.is_finite()) {
            return Err(Error::InvalidParameter(format!("cut-off width must be positive, got {eps0}")));
        }
        let half = 0.5 * eps0;
        // Near the midpoint f/f_max ~ exp(-16 u^2 / eps0^4): keep >= 16 cells per standard deviation.
        let sigma = eps0 * eps0 / (4.0 * std::f64::consts::SQRT_2);
        let wanted = (16.0 * half / sigma).ceil();
        let cells = if wanted > MAX_HALF_CELLS as f64 {
            MAX_HALF_CELLS
        } else {
            (wanted as usize).clamp(MIN_HALF_CELLS, MAX_HALF_CELLS)
        };
        let step = half / cells as f64;
        let log_peak = 4.0 / (eps0 * eps0);
        let integrand = |t: f64| -> f64 {
            let d = t * (eps0 - t);
            if d <= 0.0 {
                return 0.0;
            }
            let e = log_peak - 1.0 / d;
            if e < -745.0 {
                0.0
            } else {
                e.exp()
            }
        };

        let mut cumulative = Vec::with_capacity(cells + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..cells {
            let a = i as f64 * step;
            let b = if i + 1 == cells { half } else { (i + 1) as f64 * step };
            acc += gauss_legendre(&integrand, a, b);
            cumulative.push(acc);
        }
        let total = 2.0 * acc;
        let mut values = vec![0.0; 2 * cells + 1];
        for i in 0..=cells {
            values[i] = cumulative[i] / total;
        }
        for i in cells + 1..=2 * cells {
            values[i] = 1.0 - cumulative[2 * cells - i] / total;
        }
        Ok(Self { eps0, step, values })
    }

    pub fn eps0(&self) -> f64 {
        self.eps0
    }

    /// Number of tabulated samples over `[0, eps0]`.
    pub fn samples(&self) -> usize {
        self.values.len()
    }

    pub fn eval(&self, tau: f64) -> f64 {
        if tau <= 0.0 {
            return 0.0;
        }
        if tau >= self.eps0 {
            return 1.0;
        }
        let pos = tau / self.step;
        let i = (pos.floor() as usize).min(self.values.len() - 2);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}

/// Eight-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_26];

fn gauss_legendre<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    GL_NODES.iter().zip(&GL_WEIGHTS).map(|(x, w)| w * (f(c - r * x) + f(c + r * x))).sum::<f64>() * r
}

/// Partition `{eta_j}` of the master cut-off in level sets of `phi`.
///
/// `eta_0(tau) = eta(tau - L0^2)` and, for `j >= 1`,
/// `eta_j(tau) = eta(tau - c_j) - eta(tau - c_{j-1})` with `c_j = L0^2 (N - j) / N`,
/// so `sum_{j=0..N} eta_j = eta` identically. `eta_0` vanishes on every value of
/// `phi` reachable on `[0, T] x [0, L]` and the progressive solver drops it.
#[derive(Clone, Debug)]
pub struct CutoffFamily {
    master: Arc<MasterCutoff>,
    ncut: usize,
    offsets: Vec<f64>,
    d0sq: f64,
    l0sq: f64,
}

/// Default block count: each block spans at most ten units of `s phi`.
pub fn default_block_count(s: f64, d0sq: f64, l0sq: f64) -> usize {
    (s * (l0sq + d0sq) / 10.0).floor() as usize + 1
}

impl CutoffFamily {
    /// Builds the family with the default block count for the weight's `s`.
    pub fn new(weight: &CarlemanWeight) -> Result<Self> {
        if !(weight.s() > 0.0) {
            return Err(Error::InvalidParameter("the cut-off family needs s > 0".into()));
        }
        Self::with_count(weight, default_block_count(weight.s(), weight.d0sq(), weight.l0sq()))
    }

    pub fn with_count(weight: &CarlemanWeight, ncut: usize) -> Result<Self> {
        if ncut == 0 {
            return Err(Error::InvalidParameter("block count must be at least 1".into()));
        }
        let (d0sq, l0sq) = (weight.d0sq(), weight.l0sq());
        let master = MasterCutoff::new(d0sq / ncut as f64)?;
        let offsets = (0..=ncut).map(|j| l0sq * (ncut - j) as f64 / ncut as f64).collect();
        Ok(Self { master: Arc::new(master), ncut, offsets, d0sq, l0sq })
    }

    pub fn count(&self) -> usize {
        self.ncut
    }

    pub fn eps0(&self) -> f64 {
        self.master.eps0()
    }

    pub fn master(&self) -> &MasterCutoff {
        &self.master
    }

    pub fn eta(&self, tau: f64) -> f64 {
        self.master.eval(tau)
    }

    /// `eta_j(tau)` for `j = 0..=count()`.
    pub fn eta_j(&self, j: usize, tau: f64) -> f64 {
        assert!(j <= self.ncut, "block index {j} out of range");
        if j == 0 {
            self.master.eval(tau - self.offsets[0])
        } else {
            self.master.eval(tau - self.offsets[j]) - self.master.eval(tau - self.offsets[j - 1])
        }
    }

    /// Open interval of `tau` containing `supp eta_j`.
    pub fn support(&self, j: usize) -> (f64, f64) {
        let eps0 = self.eps0();
        if j == 0 {
            (self.l0sq, f64::INFINITY)
        } else {
            (self.offsets[j], self.offsets[j - 1] + eps0)
        }
    }

    /// Upper bound on the `phi`-width of every block support.
    pub fn width_bound(&self) -> f64 {
        (self.l0sq + self.d0sq) / self.ncut as f64 + self.eps0()
    }

    /// `sum_{j=0..N} eta_j(tau)`.
    pub fn partition_sum(&self, tau: f64) -> f64 {
        (0..=self.ncut).map(|j| self.eta_j(j, tau)).sum()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct PartitionCheck {
    pub samples: usize,
    pub max_error: f64,
}

/// Largest deviation of `sum eta_j` from `eta` over a uniform sample of `[lo, hi]`.
pub fn partition_error(family: &CutoffFamily, lo: f64, hi: f64, samples: usize) -> PartitionCheck {
    let samples = samples.max(2);
    let max_error = (0..samples)
        .map(|i| {
            let tau = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            (family.partition_sum(tau) - family.eta(tau)).abs()
        })
        .fold(0.0, f64::max);
    PartitionCheck { samples, max_error }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn baseline() -> CarlemanWeight {
        CarlemanWeight::new(-0.3, 0.99, 100.0, 1.0).unwrap()
    }

    #[test]
    fn default_count_for_baseline() {
        let fam = CutoffFamily::new(&baseline()).unwrap();
        assert_eq!(fam.count(), 18);
        assert!((fam.eps0() - 0.09 / 18.0).abs() < 1e-18);
    }

    #[test]
    fn master_shape() {
        let fam = CutoffFamily::new(&baseline()).unwrap();
        let eps0 = fam.eps0();
        assert_eq!(fam.eta(0.5 * eps0), 0.5);
        assert_eq!(fam.eta(-1.0), 0.0);
        assert_eq!(fam.eta(0.0), 0.0);
        assert_eq!(fam.eta(eps0), 1.0);
        assert_eq!(fam.eta(3.0), 1.0);
        assert!(fam.master().samples() >= 10_000);
        let mut prev = 0.0;
        for i in 0..=20_000 {
            let v = fam.eta(eps0 * i as f64 / 20_000.0);
            assert!((0.0..=1.0).contains(&v));
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn quadrature_exact_for_degree_fifteen() {
        let f = |t: f64| t.powi(15) - 3.0 * t.powi(6) + 1.0;
        let exact = 2f64.powi(16) / 16.0 - 3.0 * 2f64.powi(7) / 7.0 + 2.0;
        assert!((gauss_legendre(&f, 0.0, 2.0) - exact).abs() < 1e-10 * exact);
    }

    #[test]
    fn master_is_symmetric() {
        let master = MasterCutoff::new(0.3).unwrap();
        for i in 1..100 {
            let t = 0.3 * i as f64 / 100.0;
            assert!((master.eval(t) + master.eval(0.3 - t) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn master_against_direct_quadrature() {
        // For a wide window f does not underflow, so compare to a plain trapezoid.
        let eps0 = 1.0;
        let master = MasterCutoff::new(eps0).unwrap();
        let f = |t: f64| if t <= 0.0 || t >= eps0 { 0.0 } else { (-1.0 / (t * (eps0 - t))).exp() };
        let n = 200_000;
        let dt = eps0 / n as f64;
        let mut cum = vec![0.0; n + 1];
        for i in 0..n {
            cum[i + 1] = cum[i] + 0.5 * dt * (f(i as f64 * dt) + f((i + 1) as f64 * dt));
        }
        for &frac in &[0.1, 0.25, 0.4, 0.6, 0.9] {
            let i = (frac * n as f64) as usize;
            let expected = cum[i] / cum[n];
            assert!((master.eval(i as f64 * dt) - expected).abs() < 1e-8, "{frac}");
        }
    }

    #[test]
    fn partition_of_unity() {
        let fam = CutoffFamily::new(&baseline()).unwrap();
        let check = partition_error(&fam, -1.0, 2.0 * 1.69, 1000);
        assert!(check.max_error <= 1e-12, "{}", check.max_error);
    }

    #[test]
    fn eta_zero_vanishes_on_reachable_levels() {
        let w = baseline();
        let fam = CutoffFamily::new(&w).unwrap();
        for n in 0..=130 {
            for j in 0..=100 {
                let phi = w.phi(n as f64 * 0.01, j as f64 * 0.01);
                assert_eq!(fam.eta_j(0, phi), 0.0);
            }
        }
    }

    #[test]
    fn supports_and_width() {
        let w = baseline();
        let fam = CutoffFamily::new(&w).unwrap();
        let bound = fam.width_bound();
        for j in 1..=fam.count() {
            let (lo, hi) = fam.support(j);
            assert!(hi - lo <= bound + 1e-15);
            assert!(w.s() * (hi - lo) <= 10.0 + w.s() * fam.eps0());
            // Outside the support the block vanishes.
            assert_eq!(fam.eta_j(j, lo - 1e-9), 0.0);
            assert_eq!(fam.eta_j(j, hi + 1e-9), 0.0);
        }
    }

    #[test]
    fn second_differences_stay_bounded_at_patch_edges() {
        let master = MasterCutoff::new(0.5).unwrap();
        for &edge in &[0.0, 0.5] {
            let mut prev = f64::INFINITY;
            for k in 3..8 {
                let d = 10f64.powi(-k);
                let sd = (master.eval(edge + d) - 2.0 * master.eval(edge) + master.eval(edge - d)) / (d * d);
                assert!(sd.abs() <= prev.max(1e-6) + 1e-6, "edge {edge} d {d}: {sd}");
                prev = sd.abs();
            }
        }
    }
}
