//! Synthetic flux measurements: simulation, seeded noise, Gaussian smoothing and the
//! per-block targets fed to the minimisation.

mod regularize;
mod target;

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_weights::SpaceTimeGrid;
use crate::wave_fd::{extract_flux, read_series, solve_wave, write_series, FluxSeries, PotentialField, WaveData};

pub use regularize::{alternating_response, gaussian_kernel, gaussian_regularize, KernelUnit};
pub use target::{assemble_target, BlockTargets};

/// One processing step applied to a measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Clean { potential: String, theta: f64, interior: usize, steps: usize, h: f64, tau: f64 },
    Imported { path: String },
    Noisy { alpha: f64, seed: u64 },
    Regularized { passes: usize, unit: KernelUnit },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub flux: FluxSeries,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub alpha: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(alpha: f64, seed: u64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise level must be >= 0, got {alpha}")));
        }
        Ok(Self { alpha, seed })
    }

    /// One smoothing pass per percent of noise.
    pub fn default_passes(&self) -> usize {
        (100.0 * self.alpha).round() as usize
    }
}

impl Measurement {
    /// Solves the direct problem with the given potential and records the right-end flux.
    pub fn simulate(data: &WaveData, q: &PotentialField, grid: &SpaceTimeGrid, theta: f64, label: &str) -> Result<Self> {
        let trajectory = solve_wave(data, q, grid, theta)?;
        let flux = extract_flux(&trajectory);
        Ok(Self {
            flux,
            provenance: vec![Provenance::Clean {
                potential: label.to_string(),
                theta,
                interior: grid.interior(),
                steps: grid.steps(),
                h: grid.h(),
                tau: grid.tau(),
            }],
        })
    }

    pub fn from_series(flux: FluxSeries, origin: Provenance) -> Result<Self> {
        if flux.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: 0 });
        }
        Ok(Self { flux, provenance: vec![origin] })
    }

    /// `m'^n = m^n + alpha ||m||_inf u^n`, `u^n` i.i.d. uniform on `[-1, 1]`.
    pub fn add_noise(&self, spec: NoiseSpec) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
        let amplitude = spec.alpha * self.flux.sup_norm();
        let flux = self.flux.map(|_, v| v + amplitude * rng.random_range(-1.0..=1.0));
        let mut provenance = self.provenance.clone();
        provenance.push(Provenance::Noisy { alpha: spec.alpha, seed: spec.seed });
        Self { flux, provenance }
    }

    pub fn regularize(&self, passes: usize, unit: KernelUnit) -> Self {
        let mut provenance = self.provenance.clone();
        provenance.push(Provenance::Regularized { passes, unit });
        Self { flux: gaussian_regularize(&self.flux, passes, unit), provenance }
    }

    /// Writes `path` (columns `t,flux`) and `path.json` with the provenance chain.
    pub fn save(&self, path: &Path) -> Result<()> {
        write_series(path, &self.flux, "flux")?;
        let sidecar = serde_json::to_string_pretty(&self.provenance).map_err(|e| Error::Parse(e.to_string()))?;
        std::fs::write(sidecar_path(path), sidecar)?;
        Ok(())
    }

    /// Reads a measurement CSV; the sidecar is optional.
    pub fn load(path: &Path) -> Result<Self> {
        let flux = read_series(path)?;
        let sidecar = sidecar_path(path);
        let provenance = if sidecar.exists() {
            let text = std::fs::read_to_string(&sidecar)?;
            serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", sidecar.display())))?
        } else {
            vec![Provenance::Imported { path: path.display().to_string() }]
        };
        Ok(Self { flux, provenance })
    }
}

pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".json");
    name.into()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Measurement {
        let times: Vec<f64> = (0..10_000).map(|k| k as f64 * 1e-4).collect();
        let values = times.iter().map(|t| (6.0 * t).sin() - 0.5).collect();
        Measurement::from_series(FluxSeries::new(times, values).unwrap(), Provenance::Imported { path: "mem".into() }).unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let m = sample();
        assert_eq!(m.add_noise(NoiseSpec::new(0.0, 3).unwrap()).flux, m.flux);
    }

    #[test]
    fn noise_is_seeded() {
        let m = sample();
        let spec = NoiseSpec::new(0.05, 11).unwrap();
        assert_eq!(m.add_noise(spec).flux, m.add_noise(spec).flux);
        assert_ne!(m.add_noise(spec).flux, m.add_noise(NoiseSpec::new(0.05, 12).unwrap()).flux);
    }

    #[test]
    fn noise_bound_is_attained() {
        let m = sample();
        let noisy = m.add_noise(NoiseSpec::new(0.02, 5).unwrap());
        let bound = 0.02 * m.flux.sup_norm();
        let dev = noisy.flux.minus(&m.flux).unwrap().sup_norm();
        assert!(dev <= bound * (1.0 + 1e-12));
        assert!(dev >= 0.95 * bound);
    }

    #[test]
    fn negative_noise_rejected() {
        assert!(NoiseSpec::new(-0.1, 0).is_err());
        assert_eq!(NoiseSpec::new(0.05, 0).unwrap().default_passes(), 5);
    }

    #[test]
    fn save_load_round_trip() {
        let dir = std::env::temp_dir().join(format!("meas_{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.csv");
        let m = sample().add_noise(NoiseSpec::new(0.01, 2).unwrap()).regularize(1, KernelUnit::Sample);
        m.save(&path).unwrap();
        assert_eq!(Measurement::load(&path).unwrap(), m);
        std::fs::remove_dir_all(&dir).ok();
    }
}
