use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::json;

use wave_inverse::grid_weights::check_geometry;
use wave_inverse::inversion::{run_reconstruction, ReconstructionResult};
use wave_inverse::measurement::{Measurement, NoiseSpec};
use wave_inverse::parallel;
use wave_inverse::wave_fd::{time_derivative, write_columns, FluxSeries, PotentialField};

use crate::config::RunConfig;

pub const CLEAN_FILE: &str = "measurement.csv";
pub const NOISY_FILE: &str = "measurement_noisy.csv";
pub const REGULARIZED_FILE: &str = "measurement_regularized.csv";

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

fn prepare(dir: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    write_json(&dir.join("config.json"), cfg)
}

/// Clean flux of the fine implicit solve with the configured potential.
pub fn clean_measurement(cfg: &RunConfig) -> Result<Measurement> {
    check_geometry(cfg.length, cfg.final_time, cfg.x0, cfg.beta)?;
    let grid = cfg.direct_grid()?;
    let q = cfg.potential_on(&grid, f64::INFINITY)?;
    Ok(Measurement::simulate(&cfg.wave_data()?, &q, &grid, cfg.direct_theta, &cfg.potential)?)
}

/// Noise and smoothing as configured; the clean series when the noise level is zero.
pub fn observed(cfg: &RunConfig, clean: &Measurement) -> Result<(Option<Measurement>, Measurement)> {
    if cfg.noise == 0.0 {
        return Ok((None, clean.clone()));
    }
    let noisy = clean.add_noise(NoiseSpec::new(cfg.noise, cfg.seed)?);
    let smooth = noisy.regularize(cfg.passes(), cfg.kernel_unit);
    Ok((Some(noisy), smooth))
}

pub struct SimulateOutput {
    pub files: Vec<PathBuf>,
    pub observed: PathBuf,
}

pub fn simulate(cfg: &RunConfig) -> Result<SimulateOutput> {
    let dir = &cfg.output;
    prepare(dir, cfg)?;
    let clean = clean_measurement(cfg)?;
    let mut files = vec![dir.join(CLEAN_FILE)];
    clean.save(&files[0])?;
    let (noisy, smooth) = observed(cfg, &clean)?;
    let mut derivative_cols: Vec<(&str, FluxSeries)> = vec![("clean", time_derivative(&clean.flux)?)];
    let observed = if let Some(noisy) = noisy {
        let (n, r) = (dir.join(NOISY_FILE), dir.join(REGULARIZED_FILE));
        noisy.save(&n)?;
        smooth.save(&r)?;
        derivative_cols.push(("noisy", time_derivative(&noisy.flux)?));
        derivative_cols.push(("regularized", time_derivative(&smooth.flux)?));
        files.push(n);
        files.push(r.clone());
        r
    } else {
        files[0].clone()
    };
    let path = dir.join("flux_derivative.csv");
    let mut headers = vec!["t"];
    headers.extend(derivative_cols.iter().map(|(h, _)| *h));
    let mut columns: Vec<&[f64]> = vec![&derivative_cols[0].1.times];
    columns.extend(derivative_cols.iter().map(|(_, s)| s.values.as_slice()));
    write_columns(&path, &headers, &columns)?;
    files.push(path);
    Ok(SimulateOutput { files, observed })
}

fn write_potential(path: &Path, x: &[f64], q: &PotentialField) -> Result<()> {
    Ok(write_columns(path, &["x", "q"], &[x, &q.values])?)
}

/// Writes history, iterates, block snapshots and the summary of a finished run.
pub fn write_run(dir: &Path, cfg: &RunConfig, res: &ReconstructionResult, reference: Option<&PotentialField>, seconds: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    let h = &res.history;
    let col = |f: &dyn Fn(usize) -> f64| (0..h.len()).map(f).collect::<Vec<f64>>();
    let k = col(&|i| h[i].k as f64);
    let rel = col(&|i| h[i].rel_change);
    let werr = col(&|i| h[i].weighted_error.unwrap_or(f64::NAN));
    let sup = col(&|i| h[i].sup_update);
    let hf = col(&|i| h[i].hf_energy);
    let res_col = col(&|i| h[i].max_block_residual);
    let secs = col(&|i| h[i].seconds);
    write_columns(
        &dir.join("history.csv"),
        &["k", "rel_change", "weighted_error", "sup_update", "hf_energy", "max_block_residual", "seconds"],
        &[&k, &rel, &werr, &sup, &hf, &res_col, &secs],
    )?;
    for (i, q) in res.iterates.iter().enumerate() {
        write_potential(&dir.join(format!("potential_k{i}.csv")), &res.positions, q)?;
    }
    write_potential(&dir.join("potential_final.csv"), &res.positions, &res.q)?;
    if let Some(r) = reference {
        write_potential(&dir.join("exact_potential.csv"), &res.positions, r)?;
    }
    if !res.first_block_rates.is_empty() {
        let names: Vec<String> = (1..=res.first_block_rates.len()).map(|j| format!("block_{j}")).collect();
        let mut headers = vec!["x"];
        headers.extend(names.iter().map(String::as_str));
        let mut columns: Vec<&[f64]> = vec![&res.positions];
        columns.extend(res.first_block_rates.iter().map(Vec::as_slice));
        write_columns(&dir.join("blocks_k0.csv"), &headers, &columns)?;
    }
    let summary = json!({
        "config": cfg,
        "converged": res.converged,
        "stop": res.stop,
        "iterations": h.len(),
        "relative_l2_error": reference.map(|r| res.relative_l2_error(r)),
        "initial_weighted_error": res.initial_weighted_error,
        "weight_shift": res.weight_shift,
        "block_count": res.block_count,
        "geometry": res.geometry,
        "warnings": res.warnings,
        "seconds": seconds,
        "iteration_seconds": secs,
    });
    write_json(&dir.join("summary.json"), &summary)
}

pub fn invert(cfg: &RunConfig, measurement: &Path) -> Result<ReconstructionResult> {
    let start = Instant::now();
    let meas = Measurement::load(measurement)?;
    prepare(&cfg.output, cfg)?;
    let inv = cfg.inversion();
    let grid = inv.grid()?;
    let reference = if cfg.reference { Some(cfg.potential_on(&grid, cfg.m)?) } else { None };
    let res = run_reconstruction(&inv, &meas, &cfg.wave_data()?, None, reference.as_ref())?;
    write_run(&cfg.output, cfg, &res, reference.as_ref(), start.elapsed().as_secs_f64())?;
    Ok(res)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    S,
    Noise,
    Cfl,
    N,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::S => "s",
            Axis::Noise => "noise",
            Axis::Cfl => "cfl",
            Axis::N => "n",
        }
    }

    fn apply(self, base: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut cfg = base.clone();
        match self {
            Axis::S => cfg.s = value,
            Axis::Noise => cfg.noise = value,
            Axis::Cfl => cfg.cfl = value,
            Axis::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    bail!("N must be a positive integer, got {value}");
                }
                cfg.inverse_tau = cfg.cfl * cfg.length / (value + 1.0);
            }
        }
        cfg.output = base.output.join(format!("{}_{value}", self.name()));
        Ok(cfg)
    }
}

#[derive(Debug, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    pub relative_l2_error: f64,
    pub final_rel_change: f64,
    pub seconds: f64,
}

/// One inversion per axis value against a single fine-grid simulation.
pub fn sweep(base: &RunConfig, axis: Axis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        bail!("the sweep needs at least one axis value");
    }
    prepare(&base.output, base)?;
    let clean = clean_measurement(base)?;
    let configs = values.iter().map(|&v| axis.apply(base, v)).collect::<Result<Vec<_>>>()?;
    let rows = parallel::map(&configs, |cfg| -> Result<SweepRow> {
        let start = Instant::now();
        let (_, obs) = observed(cfg, &clean)?;
        let inv = cfg.inversion();
        let grid = inv.grid()?;
        let reference = cfg.potential_on(&grid, cfg.m)?;
        let res = run_reconstruction(&inv, &obs, &cfg.wave_data()?, None, Some(&reference))?;
        let seconds = start.elapsed().as_secs_f64();
        write_run(&cfg.output, cfg, &res, Some(&reference), seconds)?;
        Ok(SweepRow {
            value: 0.0,
            iterations: res.history.len(),
            converged: res.converged,
            relative_l2_error: res.relative_l2_error(&reference),
            final_rel_change: res.history.last().map_or(f64::NAN, |h| h.rel_change),
            seconds,
        })
    });
    let mut out = Vec::with_capacity(rows.len());
    for (row, &value) in rows.into_iter().zip(values) {
        out.push(SweepRow { value, ..row? });
    }
    let col = |f: fn(&SweepRow) -> f64| out.iter().map(f).collect::<Vec<f64>>();
    write_columns(
        &base.output.join("sweep.csv"),
        &[axis.name(), "iterations", "converged", "relative_l2_error", "final_rel_change", "seconds"],
        &[
            &col(|r| r.value),
            &col(|r| r.iterations as f64),
            &col(|r| f64::from(u8::from(r.converged))),
            &col(|r| r.relative_l2_error),
            &col(|r| r.final_rel_change),
            &col(|r| r.seconds),
        ],
    )?;
    Ok(out)
}
