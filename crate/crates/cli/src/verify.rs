use std::f64::consts::PI;
use std::sync::Arc;

use anyhow::Result;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use wave_inverse::conjugate_system::{
    assemble_system, direct_minimize, progressive_minimize, BlockRhs, ConjugateOperator, Execution, FactoredSystem, SolverOptions,
    SystemOptions,
};
use wave_inverse::field::SpaceTimeField;
use wave_inverse::grid_weights::{partition_error, CarlemanWeight, CutoffFamily, SpaceTimeGrid};
use wave_inverse::inversion::run_reconstruction;
use wave_inverse::measurement::{assemble_target, gaussian_kernel, Measurement};
use wave_inverse::wave_fd::{constant_fn, extract_flux, solve_wave, time_derivative, PotentialField, WaveData};

use crate::config::RunConfig;

#[derive(Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub passed: bool,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
}

fn below(name: &'static str, value: f64, tolerance: f64, detail: String) -> Check {
    Check { name, pass: value <= tolerance, value, tolerance, detail }
}

fn at_least(name: &'static str, value: f64, tolerance: f64, detail: String) -> Check {
    Check { name, pass: value >= tolerance, value, tolerance, detail }
}

fn weight(cfg: &RunConfig, s: f64) -> Result<CarlemanWeight> {
    Ok(CarlemanWeight::new(cfg.x0, cfg.beta, s, cfg.length)?)
}

fn options(cfg: &RunConfig, penalty: bool) -> SystemOptions {
    SystemOptions { penalty, oterm_coeff: cfg.oterm_coeff, sh_bound: cfg.sh_bound }
}

/// Grid with 20 interior nodes and 30 time steps.
fn small_grid(cfg: &RunConfig) -> Result<SpaceTimeGrid> {
    Ok(SpaceTimeGrid::new(cfg.length, cfg.final_time, 20, cfg.final_time / 30.0)?)
}

fn partition(cfg: &RunConfig) -> Result<Check> {
    let w = weight(cfg, cfg.s)?;
    let cut = CutoffFamily::new(&w)?;
    let p = partition_error(&cut, -0.1, w.l0sq() + 0.1, 10_000);
    Ok(below("partition_of_unity", p.max_error, 1e-12, format!("{} blocks, {} samples", cut.count(), p.samples)))
}

fn conjugation(cfg: &RunConfig, rng: &mut ChaCha20Rng) -> Result<Check> {
    let grid = small_grid(cfg)?;
    let w = weight(cfg, 10.0)?;
    let q: Vec<f64> = grid.interior_positions().iter().map(|x| (2.0 * PI * x).sin()).collect();
    let op = ConjugateOperator::new(w, grid, q.clone())?;
    let (levels, width) = (grid.steps() + 1, grid.nodes());
    let phi_ref = (0..levels).flat_map(|n| (0..width).map(move |j| (n, j))).map(|(n, j)| op.phi(n, j)).fold(f64::NEG_INFINITY, f64::max);
    let scale = |n: usize, j: usize| (w.s() * (op.phi(n, j) - phi_ref)).exp();
    let (tau2, h2) = (grid.tau().powi(2), grid.h().powi(2));
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let z = SpaceTimeField::from_fn(levels, width, |n, j| if n == 0 || j == 0 || j == width - 1 { 0.0 } else { rng.random_range(-1.0..1.0) });
        let y = SpaceTimeField::from_fn(levels, width, |n, j| scale(n, j) * z.get(n, j));
        let (ly, lz) = (op.apply_l(&y)?, op.apply_wave(&z)?);
        for n in 1..grid.steps() {
            for j in 1..=grid.interior() {
                let terms = (z.get(n + 1, j).abs() + 2.0 * z.get(n, j).abs() + z.get(n - 1, j).abs()) / tau2
                    + (z.get(n, j + 1).abs() + 2.0 * z.get(n, j).abs() + z.get(n, j - 1).abs()) / h2
                    + (q[j - 1] * z.get(n, j)).abs();
                let err = (ly.get(n, j) - scale(n, j) * lz.get(n, j)).abs();
                worst = worst.max(err / (scale(n, j) * terms).max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok(below("conjugation_identity", worst, 1e-12, "componentwise, 20 random fields, s = 10".into()))
}

fn spd(cfg: &RunConfig) -> Result<Vec<Check>> {
    let grid = small_grid(cfg)?;
    let mut out = Vec::new();
    for (name, s) in [("spd_s1", 1.0), ("spd_s10", 10.0), ("spd_s100", 100.0)] {
        let op = ConjugateOperator::new(weight(cfg, s)?, grid, vec![0.0; grid.interior()])?;
        let sys = assemble_system(&op, options(cfg, true))?;
        let check = match sys.matrix.cholesky() {
            Ok(f) => Check { name, pass: f.min_pivot() > 0.0, value: f.min_pivot(), tolerance: 0.0, detail: "smallest Cholesky pivot".into() },
            Err(e) => Check { name, pass: false, value: f64::NAN, tolerance: 0.0, detail: e.to_string() },
        };
        out.push(check);
    }
    Ok(out)
}

fn nonnegative_form(cfg: &RunConfig, rng: &mut ChaCha20Rng) -> Result<Check> {
    let grid = small_grid(cfg)?;
    let op = ConjugateOperator::new(weight(cfg, 10.0)?, grid, vec![-1.0; grid.interior()])?;
    let sys = assemble_system(&op, options(cfg, false))?;
    let mut min = f64::INFINITY;
    for _ in 0..100 {
        let y: Vec<f64> = (0..sys.space.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
        min = min.min(sys.matrix.quadratic_form(&y));
    }
    Ok(at_least("quadratic_form_nonnegative", min, 0.0, "penalty off, 100 random fields".into()))
}

fn progressive(cfg: &RunConfig) -> Result<Check> {
    let grid = SpaceTimeGrid::with_cfl(cfg.length, cfg.final_time, 0.05, 1.0)?;
    let w = weight(cfg, 20.0)?;
    let cut = CutoffFamily::new(&w)?;
    let data = cfg.wave_data()?;
    let measured = Measurement::simulate(&data, &PotentialField::sample(&grid, 3.0, |x| (2.0 * PI * x).sin()), &grid, 0.0, "verify")?;
    let q = PotentialField::zeros(grid.interior(), 3.0);
    let mismatch = extract_flux(&solve_wave(&data, &q, &grid, 0.0)?).minus(&measured.flux)?;
    let targets = assemble_target(&time_derivative(&mismatch)?, &w, &cut, &grid)?;
    let total = BlockRhs::boundary_only(targets.sum());
    let blocks: Vec<BlockRhs> = targets.blocks.into_iter().map(BlockRhs::boundary_only).collect();
    let op = ConjugateOperator::new(w, grid, q.values)?;
    let fs = FactoredSystem::new(assemble_system(&op, options(cfg, true))?, SolverOptions::default())?;
    let p = progressive_minimize(&fs, &blocks, Execution::Parallel)?.rate;
    let (d, _) = direct_minimize(&fs, &total)?;
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a - b).collect();
    Ok(below("progressive_equivalence", norm(&diff) / norm(&d), 1e-6, format!("s = 20, {} blocks", blocks.len())))
}

fn kernel(cfg: &RunConfig) -> Check {
    let k = gaussian_kernel(cfg.inverse_tau, cfg.kernel_unit);
    below("kernel_normalized", (k.iter().sum::<f64>() - 1.0).abs(), 1e-14, format!("{} taps", k.len()))
}

fn fixed_point(cfg: &RunConfig) -> Result<Check> {
    let mut inv = cfg.inversion();
    inv.tau = 0.05;
    inv.s = 5.0;
    inv.max_iter = 1;
    let grid = inv.grid()?;
    let data = cfg.wave_data()?;
    let q = PotentialField::sample(&grid, inv.m, |x| (2.0 * PI * x).sin());
    let meas = Measurement::simulate(&data, &q, &grid, inv.theta, "verify")?;
    let res = run_reconstruction(&inv, &meas, &data, Some(q.clone()), None)?;
    let bound = 1e-8 * (1.0 + q.sup_norm());
    Ok(below("fixed_point", res.history[0].sup_update, bound, "inverse crime, q0 = Q".into()))
}

fn order() -> Result<Check> {
    let exact = |t: f64, x: f64| 2.0 + (PI * x).sin() * (2.0 * PI * t).cos();
    let data = WaveData {
        source: Arc::new(move |t, x| -3.0 * PI * PI * (PI * x).sin() * (2.0 * PI * t).cos() + x * exact(t, x)),
        left: constant_fn(2.0),
        right: constant_fn(2.0),
        w0: Arc::new(|_, x| 2.0 + (PI * x).sin()),
        w1: constant_fn(0.0),
    };
    let mut errors = Vec::new();
    for cells in [20.0, 40.0, 80.0] {
        let grid = SpaceTimeGrid::with_cfl(1.0, 1.0, 1.0 / cells, 1.0)?;
        let traj = solve_wave(&data, &PotentialField::sample(&grid, 3.0, |x| x), &grid, 0.0)?;
        let err = (0..=grid.steps())
            .flat_map(|n| (0..grid.nodes()).map(move |j| (n, j)))
            .map(|(n, j)| (traj.get(n, j) - exact(grid.t(n), grid.x(j))).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let rate = errors.windows(2).map(|w| (w[0] / w[1]).log2()).fold(f64::INFINITY, f64::min);
    Ok(at_least("direct_solver_order", rate, 1.9, format!("max errors [{}]", errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>().join(", "))))
}

/// System warnings and factorization on the configured inverse grid.
fn configured_system(cfg: &RunConfig) -> Result<(Check, Vec<String>)> {
    let inv = cfg.inversion();
    let grid = inv.grid()?;
    let op = ConjugateOperator::new(inv.weight()?, grid, vec![0.0; grid.interior()])?;
    let sys = assemble_system(&op, inv.system_options())?;
    let warnings = sys.warnings.clone();
    let check = match FactoredSystem::new(sys, SolverOptions::default()) {
        Ok(f) => Check { name: "configured_system_factorizes", pass: true, value: f.min_pivot(), tolerance: 0.0, detail: format!("N = {}, Nt = {}", grid.interior(), grid.steps()) },
        Err(e) => Check { name: "configured_system_factorizes", pass: false, value: f64::NAN, tolerance: 0.0, detail: e.to_string() },
    };
    Ok((check, warnings))
}

pub fn verify(cfg: &RunConfig) -> Report {
    let mut rng = ChaCha20Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    let mut warnings = Vec::new();
    let mut push = |name: &'static str, r: Result<Vec<Check>>| match r {
        Ok(c) => checks.extend(c),
        Err(e) => checks.push(Check { name, pass: false, value: f64::NAN, tolerance: f64::NAN, detail: format!("error: {e:#}") }),
    };
    push("partition_of_unity", partition(cfg).map(|c| vec![c]));
    push("conjugation_identity", conjugation(cfg, &mut rng).map(|c| vec![c]));
    push("spd", spd(cfg));
    push("quadratic_form_nonnegative", nonnegative_form(cfg, &mut rng).map(|c| vec![c]));
    push("progressive_equivalence", progressive(cfg).map(|c| vec![c]));
    push("kernel_normalized", Ok(vec![kernel(cfg)]));
    push("fixed_point", fixed_point(cfg).map(|c| vec![c]));
    push("direct_solver_order", order().map(|c| vec![c]));
    push(
        "configured_system_factorizes",
        configured_system(cfg).map(|(c, w)| {
            warnings.extend(w);
            vec![c]
        }),
    );
    let passed = checks.iter().all(|c| c.pass);
    Report { passed, checks, warnings }
}
