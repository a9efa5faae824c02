//! Fixed-point reconstruction loop, potential update and convergence diagnostics.

mod nu;
mod run;
mod update;

pub use nu::{compute_nu_tilde, split_nu_by_level};
pub use run::{fixed_point_rate, StepOutput, run_reconstruction, InversionConfig, IterationRecord, ReconstructionResult, StopReason, Variant};
pub use update::{floor_mask, hf_energy, interpolate_dead_zone, relative_change, truncate_tm, update_potential, weighted_error};
