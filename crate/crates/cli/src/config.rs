use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use wave_inverse::conjugate_system::{Execution, SolverOptions};
use wave_inverse::expr::Expr;
use wave_inverse::grid_weights::SpaceTimeGrid;
use wave_inverse::inversion::{InversionConfig, Variant};
use wave_inverse::measurement::KernelUnit;
use wave_inverse::wave_fd::{PotentialField, WaveData};

/// Every knob of a run. Keys are flat so a config file is a plain list of `key = value` lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub length: f64,
    pub final_time: f64,
    /// Source term `f(x, t)`.
    pub source: String,
    /// Dirichlet data at `x = 0` and `x = L`.
    pub boundary_left: String,
    pub boundary_right: String,
    pub w0: String,
    pub w1: String,
    /// Potential used to simulate data and as the reference for errors.
    pub potential: String,
    pub x0: f64,
    pub beta: f64,
    pub s: f64,
    pub m: f64,
    pub cfl: f64,
    pub direct_h: f64,
    pub direct_tau: f64,
    pub direct_theta: f64,
    pub inverse_tau: f64,
    pub inverse_theta: f64,
    pub noise: f64,
    pub seed: u64,
    /// Smoothing passes; one per percent of noise when unset.
    pub passes: Option<usize>,
    pub kernel_unit: KernelUnit,
    pub variant: Variant,
    pub penalty: bool,
    pub ncut: Option<usize>,
    pub eps_stop: f64,
    pub max_iter: usize,
    pub alpha_floor: f64,
    pub interpolate_dead_zone: bool,
    pub oterm_coeff: f64,
    pub sh_bound: f64,
    /// Compare iterates against `potential`.
    pub reference: bool,
    pub sequential: bool,
    pub output: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            length: 1.0,
            final_time: 1.3,
            source: "0".into(),
            boundary_left: "2".into(),
            boundary_right: "2".into(),
            w0: "2 + sin(pi*x)".into(),
            w1: "0".into(),
            potential: "sin(2*pi*x)".into(),
            x0: -0.3,
            beta: 0.99,
            s: 100.0,
            m: 3.0,
            cfl: 1.0,
            direct_h: 0.00025,
            direct_tau: 0.00033,
            direct_theta: 1.0,
            inverse_tau: 0.01,
            inverse_theta: 0.0,
            noise: 0.0,
            seed: 1,
            passes: None,
            kernel_unit: KernelUnit::default(),
            variant: Variant::Alg4,
            penalty: true,
            ncut: None,
            eps_stop: 1e-5,
            max_iter: 10,
            alpha_floor: 0.0,
            interpolate_dead_zone: false,
            oterm_coeff: 2.0,
            sh_bound: 1.0,
            reference: true,
            sequential: false,
            output: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn wave_data(&self) -> Result<WaveData> {
        let f = |src: &str| Expr::parse(src).map(|e| e.to_fn());
        Ok(WaveData {
            source: f(&self.source)?,
            left: f(&self.boundary_left)?,
            right: f(&self.boundary_right)?,
            w0: f(&self.w0)?,
            w1: f(&self.w1)?,
        })
    }

    pub fn potential_expr(&self) -> Result<Expr> {
        let e = Expr::parse(&self.potential)?;
        if e.depends_on_t() {
            bail!("the potential `{}` must not depend on t", self.potential);
        }
        Ok(e)
    }

    pub fn potential_on(&self, grid: &SpaceTimeGrid, bound: f64) -> Result<PotentialField> {
        let e = self.potential_expr()?;
        Ok(PotentialField::sample(grid, bound, |x| e.eval(x, 0.0)))
    }

    pub fn direct_grid(&self) -> Result<SpaceTimeGrid> {
        Ok(SpaceTimeGrid::with_steps(self.length, self.final_time, self.direct_h, self.direct_tau)?)
    }

    pub fn passes(&self) -> usize {
        self.passes.unwrap_or_else(|| (100.0 * self.noise).round() as usize)
    }

    pub fn inversion(&self) -> InversionConfig {
        InversionConfig {
            length: self.length,
            final_time: self.final_time,
            x0: self.x0,
            beta: self.beta,
            s: self.s,
            m: self.m,
            alpha_floor: self.alpha_floor,
            eps_stop: self.eps_stop,
            max_iter: self.max_iter,
            variant: self.variant,
            theta: self.inverse_theta,
            tau: self.inverse_tau,
            cfl: self.cfl,
            penalty: self.penalty,
            oterm_coeff: self.oterm_coeff,
            sh_bound: self.sh_bound,
            ncut: self.ncut,
            interpolate_dead_zone: self.interpolate_dead_zone,
            solver: SolverOptions::default(),
            execution: if self.sequential { Execution::Sequential } else { Execution::Parallel },
        }
    }
}
