use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::band::BandMatrix;
use super::operator::ConjugateOperator;
use crate::error::Result;
use crate::field::SpaceTimeField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemOptions {
    /// Adds the `s h^2 |d_tau^+ d_h^+ y|^2` high-frequency term.
    pub penalty: bool,
    /// Weight of the `s^3 |y|^2` term on the region `O`, doubled for the odd extension to `t < 0`.
    pub oterm_coeff: f64,
    /// Warn when `s h` exceeds this.
    pub sh_bound: f64,
}

impl Default for SystemOptions {
    fn default() -> Self {
        Self { penalty: true, oterm_coeff: 2.0, sh_bound: 1.0 }
    }
}

/// Unknowns `Y^n_j`, `n = 1..=Nt`, `j = 1..=N`, ordered time-major.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialSpace {
    pub interior: usize,
    pub steps: usize,
}

impl TrialSpace {
    pub fn dim(&self) -> usize {
        self.interior * self.steps
    }

    /// Index of `(n, j)`, `None` on the fixed rows `n = 0`, `j = 0`, `j = N + 1`.
    #[inline]
    pub fn index(&self, n: usize, j: usize) -> Option<usize> {
        if n == 0 || n > self.steps || j == 0 || j > self.interior {
            None
        } else {
            Some((n - 1) * self.interior + (j - 1))
        }
    }

    pub fn to_field(&self, v: &[f64]) -> SpaceTimeField {
        let mut f = SpaceTimeField::zeros(self.steps + 1, self.interior + 2);
        for n in 1..=self.steps {
            f.row_mut(n)[1..=self.interior].copy_from_slice(&v[(n - 1) * self.interior..n * self.interior]);
        }
        f
    }

    pub fn from_field(&self, f: &SpaceTimeField) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        for n in 1..=self.steps {
            v.extend_from_slice(&f.row(n)[1..=self.interior]);
        }
        v
    }
}

/// The symmetric form of the discrete variational problem on the trial space.
#[derive(Clone, Debug)]
pub struct QuadraticSystem {
    pub op: ConjugateOperator,
    pub space: TrialSpace,
    pub matrix: BandMatrix,
    pub options: SystemOptions,
    pub warnings: Vec<String>,
}

/// Sparse row of a linear functional on the trial space.
type SparseRow = Vec<(usize, f64)>;

fn add_outer(a: &mut BandMatrix, row: &SparseRow, weight: f64) {
    for (p, &(i, ci)) in row.iter().enumerate() {
        for &(j, cj) in &row[..=p] {
            a.add(i, j, weight * ci * cj);
        }
    }
}

/// Mixed difference `d_tau^+ d_h^+ y` at `(n, j)`, `n = 0..Nt-1`, `j = 0..=N`.
pub(crate) fn mixed_difference_row(space: &TrialSpace, n: usize, j: usize, tau: f64, h: f64) -> SparseRow {
    let c = 1.0 / (tau * h);
    [(n + 1, j + 1, c), (n + 1, j, -c), (n, j + 1, -c), (n, j, c)]
        .into_iter()
        .filter_map(|(m, k, v)| space.index(m, k).map(|i| (i, v)))
        .collect()
}

/// Builds `A` with
/// `A(Y, y) = h tau sum (L Y)(L y) + s tau sum (Y_N / h)(y_N / h) + c_O s^3 h tau sum_O Y y
///  + [penalty] s h^2 h tau sum (d_tau^+ d_h^+ Y)(d_tau^+ d_h^+ y)`.
pub fn assemble_system(op: &ConjugateOperator, options: SystemOptions) -> Result<QuadraticSystem> {
    let grid = *op.grid();
    let (n_int, steps) = (grid.interior(), grid.steps());
    let space = TrialSpace { interior: n_int, steps };
    let (h, tau, s) = (grid.h(), grid.tau(), op.s());
    let mut a = BandMatrix::zeros(space.dim(), 2 * n_int);
    let mut warnings = Vec::new();
    if s * h > options.sh_bound {
        warnings.push(format!("s h = {:.3} exceeds the admissibility bound {}", s * h, options.sh_bound));
    }

    let cell = h * tau;
    let mut row: SparseRow = Vec::with_capacity(5);
    for n in 1..steps {
        for j in 1..=n_int {
            let c = op.stencil(n, j);
            row.clear();
            for (m, k, v) in [
                (n - 1, j, c.t_minus),
                (n, j - 1, c.x_minus),
                (n, j, c.center),
                (n, j + 1, c.x_plus),
                (n + 1, j, c.t_plus),
            ] {
                if let Some(i) = space.index(m, k) {
                    row.push((i, v));
                }
            }
            add_outer(&mut a, &row, cell);
        }
    }

    for n in 1..=steps {
        let i = space.index(n, n_int).unwrap();
        a.add(i, i, s * tau / (h * h));
    }

    if options.oterm_coeff != 0.0 {
        let w = options.oterm_coeff * s.powi(3) * cell;
        for n in 1..=steps {
            for j in 1..=n_int {
                if op.weight().in_region_o(grid.t(n), grid.x(j)) {
                    let i = space.index(n, j).unwrap();
                    a.add(i, i, w);
                }
            }
        }
    }

    if options.penalty {
        let w = s * h * h * cell;
        for n in 0..steps {
            for j in 0..=n_int {
                let row = mixed_difference_row(&space, n, j, tau, h);
                add_outer(&mut a, &row, w);
            }
        }
    }

    Ok(QuadraticSystem { op: op.clone(), space, matrix: a, options, warnings })
}

impl QuadraticSystem {
    /// `A(y, y)` for a field on the full mesh; fixed rows are ignored.
    pub fn energy(&self, y: &SpaceTimeField) -> f64 {
        self.matrix.quadratic_form(&self.space.from_field(y))
    }

    /// Dense copy for small-grid checks.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.space.dim();
        (0..n).map(|i| (0..n).map(|j| self.matrix.get(i, j)).collect()).collect()
    }

    /// Writes the lower triangle as `row col value` lines, 0-based.
    pub fn dump_coordinate(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "% symmetric lower triangle, dimension {}", self.space.dim())?;
        for (i, j, v) in self.matrix.lower_entries() {
            writeln!(out, "{i} {j} {v:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_weights::{CarlemanWeight, SpaceTimeGrid};

    fn system(s: f64, penalty: bool, oterm: f64) -> QuadraticSystem {
        let grid = SpaceTimeGrid::new(1.0, 1.3, 9, 0.1).unwrap();
        let weight = CarlemanWeight::new(-0.3, 0.99, s, 1.0).unwrap();
        let op = ConjugateOperator::new(weight, grid, vec![0.3; 9]).unwrap();
        assemble_system(&op, SystemOptions { penalty, oterm_coeff: oterm, sh_bound: 1.0 }).unwrap()
    }

    #[test]
    fn form_matches_definition() {
        // Independent evaluation of every term from the operator output.
        let sys = system(3.0, true, 2.0);
        let op = &sys.op;
        let g = *op.grid();
        let y = SpaceTimeField::from_fn(g.steps() + 1, g.nodes(), |n, j| {
            if n == 0 || j == 0 || j == g.nodes() - 1 { 0.0 } else { ((n * 31 + j * 17) % 13) as f64 / 6.0 - 1.0 }
        });
        let (h, tau, s) = (g.h(), g.tau(), op.s());
        let ly = op.apply_l(&y).unwrap();
        let mut e = h * tau * ly.as_slice().iter().map(|v| v * v).sum::<f64>();
        for n in 1..=g.steps() {
            e += s * tau * (y.get(n, g.interior()) / h).powi(2);
            for j in 1..=g.interior() {
                if op.weight().in_region_o(g.t(n), g.x(j)) {
                    e += 2.0 * s.powi(3) * h * tau * y.get(n, j).powi(2);
                }
            }
        }
        for n in 0..g.steps() {
            for j in 0..=g.interior() {
                let d = (y.get(n + 1, j + 1) - y.get(n + 1, j) - y.get(n, j + 1) + y.get(n, j)) / (tau * h);
                e += s * h * h * h * tau * d * d;
            }
        }
        let got = sys.energy(&y);
        assert!((got - e).abs() <= 1e-12 * e, "{got} vs {e}");
    }

    #[test]
    fn symmetric_and_nonnegative() {
        let sys = system(10.0, false, 2.0);
        let d = sys.to_dense();
        for i in 0..d.len() {
            for j in 0..d.len() {
                assert_eq!(d[i][j], d[j][i]);
            }
        }
        let g = *sys.op.grid();
        for seed in 0..100u64 {
            let y = SpaceTimeField::from_fn(g.steps() + 1, g.nodes(), |n, j| {
                let k = (seed * 7919 + n as u64 * 104_729 + j as u64 * 1_299_709) % 1000;
                if n == 0 || j == 0 || j == g.nodes() - 1 { 0.0 } else { k as f64 / 500.0 - 1.0 }
            });
            assert!(sys.energy(&y) >= 0.0);
        }
    }

    #[test]
    fn admissibility_warning() {
        assert!(system(5.0, true, 2.0).warnings.is_empty());
        assert_eq!(system(20.0, true, 2.0).warnings.len(), 1);
    }

    #[test]
    fn coordinate_dump() {
        let sys = system(1.0, true, 2.0);
        let path = std::env::temp_dir().join(format!("coo_{}.txt", std::process::id()));
        sys.dump_coordinate(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().skip(1).collect();
        assert_eq!(lines.len(), sys.matrix.lower_entries().count());
        let first: Vec<&str> = lines[0].split_whitespace().collect();
        assert_eq!(first[0], "0");
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn trial_space_round_trip() {
        let space = TrialSpace { interior: 4, steps: 3 };
        let v: Vec<f64> = (0..12).map(|k| k as f64).collect();
        let f = space.to_field(&v);
        assert_eq!(f.get(0, 2), 0.0);
        assert_eq!(f.get(1, 1), 0.0 + v[0]);
        assert_eq!(f.get(3, 4), v[11]);
        assert_eq!(space.from_field(&f), v);
    }
}
