use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::nu::{compute_nu_tilde, split_nu_by_level};
use super::update::{floor_mask, hf_energy, interpolate_dead_zone, relative_change, truncate_tm, update_potential, weighted_error};
use crate::conjugate_system::{
    assemble_system, progressive_minimize, BlockRhs, ConjugateOperator, Execution, FactoredSystem, SolverOptions, SystemOptions,
};
use crate::error::{Error, Result};
use crate::grid_weights::{check_geometry, CarlemanWeight, CutoffFamily, GammaCondition, GeometryReport, SpaceTimeGrid};
use crate::measurement::{assemble_target, Measurement};
use crate::wave_fd::{extract_flux, resample, solve_wave, time_derivative, FluxSeries, PotentialField, WaveData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Penalty target from the current trajectory.
    Alg3,
    /// Penalty target set to zero.
    Alg4,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InversionConfig {
    pub length: f64,
    pub final_time: f64,
    pub x0: f64,
    pub beta: f64,
    pub s: f64,
    /// A priori bound `||Q||_inf <= m`.
    pub m: f64,
    pub alpha_floor: f64,
    pub eps_stop: f64,
    pub max_iter: usize,
    pub variant: Variant,
    pub theta: f64,
    pub tau: f64,
    pub cfl: f64,
    pub penalty: bool,
    pub oterm_coeff: f64,
    pub sh_bound: f64,
    /// Overrides the default block count.
    pub ncut: Option<usize>,
    /// Interpolates across nodes removed by `alpha_floor` after the last iteration.
    pub interpolate_dead_zone: bool,
    pub solver: SolverOptions,
    pub execution: Execution,
}

impl Default for InversionConfig {
    /// Clean-data settings at `CFL = 1`, `s = 100`.
    fn default() -> Self {
        Self {
            length: 1.0,
            final_time: 1.3,
            x0: -0.3,
            beta: 0.99,
            s: 100.0,
            m: 3.0,
            alpha_floor: 0.0,
            eps_stop: 1e-5,
            max_iter: 10,
            variant: Variant::Alg4,
            theta: 0.0,
            tau: 0.01,
            cfl: 1.0,
            penalty: true,
            oterm_coeff: 2.0,
            sh_bound: 1.0,
            ncut: None,
            interpolate_dead_zone: false,
            solver: SolverOptions::default(),
            execution: Execution::Parallel,
        }
    }
}

impl InversionConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.s > 0.0) {
            return bad("s must be positive");
        }
        if !(self.m > 0.0) {
            return bad("the a priori bound m must be positive");
        }
        if !(self.alpha_floor >= 0.0) {
            return bad("alpha_floor must be >= 0");
        }
        if !(self.eps_stop > 0.0) {
            return bad("the stopping tolerance must be positive");
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<SpaceTimeGrid> {
        SpaceTimeGrid::with_cfl(self.length, self.final_time, self.tau, self.cfl)
    }

    pub fn weight(&self) -> Result<CarlemanWeight> {
        CarlemanWeight::new(self.x0, self.beta, self.s, self.length)
    }

    pub fn system_options(&self) -> SystemOptions {
        SystemOptions { penalty: self.penalty, oterm_coeff: self.oterm_coeff, sh_bound: self.sh_bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub k: usize,
    pub rel_change: f64,
    /// Weighted distance of `q^{k+1}` to the reference, when one is known.
    pub weighted_error: Option<f64>,
    pub sup_update: f64,
    pub hf_energy: f64,
    pub max_block_residual: f64,
    pub seconds: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxIterations,
    Diverged,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReconstructionResult {
    pub q: PotentialField,
    pub positions: Vec<f64>,
    /// `q^0, q^1, ...`.
    pub iterates: Vec<PotentialField>,
    pub history: Vec<IterationRecord>,
    pub converged: bool,
    pub stop: StopReason,
    pub initial_weighted_error: Option<f64>,
    /// `max phi(0, .)` subtracted inside the weighted error.
    pub weight_shift: f64,
    pub block_count: usize,
    /// Per-block contributions to the first update.
    pub first_block_rates: Vec<Vec<f64>>,
    pub geometry: GeometryReport,
    pub warnings: Vec<String>,
}

impl ReconstructionResult {
    /// `||q - Q||_2 / ||Q||_2` on the nodes.
    pub fn relative_l2_error(&self, reference: &PotentialField) -> f64 {
        let diff: f64 = self.q.values.iter().zip(&reference.values).map(|(a, b)| (a - b).powi(2)).sum();
        diff.sqrt() / reference.l2_norm().max(1e-30)
    }
}

/// Fires after three successive increases of the relative change with overall growth above 10.
fn divergence(history: &[IterationRecord]) -> Option<(f64, f64)> {
    let n = history.len();
    if n < 4 {
        return None;
    }
    let r: Vec<f64> = history[n - 4..].iter().map(|h| h.rel_change).collect();
    let rising = r.windows(2).all(|w| w[1] > w[0]);
    (rising && r[3] > 10.0 * r[0]).then_some((r[0], r[3]))
}

/// Output of one step of the fixed-point map.
#[derive(Clone, Debug)]
pub struct StepOutput {
    /// Initial rate `d_t Z(0, x_j)`.
    pub rate: Vec<f64>,
    /// Contribution of each block to `rate`.
    pub block_rates: Vec<Vec<f64>>,
    pub max_block_residual: f64,
    pub warnings: Vec<String>,
}

pub fn fixed_point_rate(
    cfg: &InversionConfig,
    data: &WaveData,
    q: &PotentialField,
    measured: &FluxSeries,
    grid: &SpaceTimeGrid,
    weight: &CarlemanWeight,
    cut: &CutoffFamily,
) -> Result<StepOutput> {
    let w = solve_wave(data, q, grid, cfg.theta)?;
    let mismatch = extract_flux(&w).minus(measured)?;
    let mu = time_derivative(&mismatch)?;
    let targets = assemble_target(&mu, weight, cut, grid)?;

    let mut blocks: Vec<BlockRhs> = targets.blocks.into_iter().map(BlockRhs::boundary_only).collect();
    if cfg.variant == Variant::Alg3 {
        let nu = compute_nu_tilde(&w, weight, cut);
        for (b, part) in blocks.iter_mut().zip(split_nu_by_level(&nu, weight, cut, |n| grid.t(n), |j| grid.x(j))) {
            b.penalty = Some(part);
        }
    }

    let op = ConjugateOperator::new(*weight, *grid, q.values.clone())?;
    let system = assemble_system(&op, cfg.system_options())?;
    let warnings = system.warnings.clone();
    let fs = FactoredSystem::new(system, cfg.solver)?;
    let result = progressive_minimize(&fs, &blocks, cfg.execution)?;
    let max_block_residual = result.blocks.iter().map(|b| b.residual).fold(0.0, f64::max);
    Ok(StepOutput { rate: result.rate, block_rates: result.block_rates, max_block_residual, warnings })
}

/// Runs the fixed-point iteration from `q0` (zero when `None`).
pub fn run_reconstruction(
    cfg: &InversionConfig,
    measurement: &Measurement,
    data: &WaveData,
    q0: Option<PotentialField>,
    reference: Option<&PotentialField>,
) -> Result<ReconstructionResult> {
    cfg.validate()?;
    let geometry = check_geometry(cfg.length, cfg.final_time, cfg.x0, cfg.beta)?;
    if geometry.cond_gamma == GammaCondition::Fail {
        return Err(Error::InvalidParameter("x0 > L: observation on {x = L} is not admissible".into()));
    }
    let mut warnings = geometry.warnings();
    let grid = cfg.grid()?;
    let weight = cfg.weight()?;
    let cut = match cfg.ncut {
        Some(n) => CutoffFamily::with_count(&weight, n)?,
        None => CutoffFamily::new(&weight)?,
    };
    let measured = resample(&measurement.flux, &grid.times())?;
    let positions = grid.interior_positions();
    let w0 = data.initial_displacement(&grid);
    let valid = floor_mask(&w0, cfg.alpha_floor)?;

    let mut q = match q0 {
        Some(q) => {
            if q.len() != grid.interior() {
                return Err(Error::ShapeMismatch { expected: format!("{} nodes", grid.interior()), got: format!("{}", q.len()) });
            }
            truncate_tm(&q, cfg.m)
        }
        None => PotentialField::zeros(grid.interior(), cfg.m),
    };
    if let Some(r) = reference {
        if r.len() != q.len() {
            return Err(Error::ShapeMismatch { expected: format!("{} reference nodes", q.len()), got: format!("{}", r.len()) });
        }
    }
    let werr = |q: &PotentialField| reference.map(|r| weighted_error(q, r, &weight, &positions, grid.h()));
    let initial = werr(&q);
    let weight_shift = initial.map_or_else(|| positions.iter().map(|&x| weight.phi(0.0, x)).fold(f64::NEG_INFINITY, f64::max), |e| e.1);

    let mut iterates = vec![q.clone()];
    let mut history = Vec::new();
    let mut stop = StopReason::MaxIterations;
    let mut first_block_rates = Vec::new();
    for k in 0..cfg.max_iter {
        let start = Instant::now();
        let step = fixed_point_rate(cfg, data, &q, &measured, &grid, &weight, &cut)?;
        for w in step.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let next = update_potential(&q, &step.rate, &w0, cfg.alpha_floor)?;
        if k == 0 {
            first_block_rates = step.block_rates;
        }
        let rel = relative_change(&next, &q);
        let sup_update = next.values.iter().zip(&q.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        history.push(IterationRecord {
            k,
            rel_change: rel,
            weighted_error: werr(&next).map(|e| e.0),
            sup_update,
            hf_energy: hf_energy(&next),
            max_block_residual: step.max_block_residual,
            seconds: start.elapsed().as_secs_f64(),
        });
        q = next;
        iterates.push(q.clone());
        if !rel.is_finite() {
            stop = StopReason::Diverged;
            break;
        }
        if rel <= cfg.eps_stop {
            stop = StopReason::Converged;
            break;
        }
        if divergence(&history).is_some() {
            stop = StopReason::Diverged;
            break;
        }
    }
    if cfg.interpolate_dead_zone && valid.iter().any(|v| !v) {
        q = truncate_tm(&interpolate_dead_zone(&q, &valid), cfg.m);
    }
    Ok(ReconstructionResult {
        q,
        positions,
        iterates,
        history,
        converged: stop == StopReason::Converged,
        stop,
        initial_weighted_error: initial.map(|e| e.0),
        weight_shift,
        block_count: cut.count(),
        first_block_rates,
        geometry,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(rel: f64) -> IterationRecord {
        IterationRecord { k: 0, rel_change: rel, weighted_error: None, sup_update: 0.0, hf_energy: 0.0, max_block_residual: 0.0, seconds: 0.0 }
    }

    #[test]
    fn divergence_guard() {
        let h: Vec<_> = [1.0, 2.0, 5.0, 11.0].into_iter().map(record).collect();
        assert!(divergence(&h).is_some());
        let h: Vec<_> = [1.0, 2.0, 5.0, 9.0].into_iter().map(record).collect();
        assert!(divergence(&h).is_none());
        let h: Vec<_> = [1.0, 20.0, 5.0, 50.0].into_iter().map(record).collect();
        assert!(divergence(&h).is_none());
    }

    #[test]
    fn config_validation() {
        assert!(InversionConfig::default().validate().is_ok());
        let bad = InversionConfig { m: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = InversionConfig { max_iter: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn inverse_crime_fixed_point_small() {
        // Same grid and scheme for data and inversion, started at the answer.
        let cfg = InversionConfig { s: 5.0, tau: 0.05, max_iter: 3, ..Default::default() };
        let grid = cfg.grid().unwrap();
        let data = WaveData::baseline();
        let big_q = PotentialField::sample(&grid, cfg.m, |x| (2.0 * std::f64::consts::PI * x).sin());
        let meas = Measurement::simulate(&data, &big_q, &grid, cfg.theta, "sin(2 pi x)").unwrap();
        let res = run_reconstruction(&cfg, &meas, &data, Some(big_q.clone()), Some(&big_q)).unwrap();
        assert!(res.converged);
        assert_eq!(res.history.len(), 1);
        assert!(res.history[0].sup_update <= 1e-8 * (1.0 + big_q.sup_norm()));
    }

    #[test]
    fn x0_beyond_l_rejected() {
        let cfg = InversionConfig { x0: 1.3, ..Default::default() };
        let grid = SpaceTimeGrid::with_cfl(1.0, 1.3, 0.05, 1.0).unwrap();
        let data = WaveData::baseline();
        let meas = Measurement::simulate(&data, &PotentialField::zeros(grid.interior(), 3.0), &grid, 0.0, "0").unwrap();
        assert!(run_reconstruction(&cfg, &meas, &data, None, None).is_err());
    }
}
