//! Meshes, the Carleman weight, the region `O` and the cut-off family.

mod cutoff;
mod grid;
mod weight;

pub use cutoff::{default_block_count, partition_error, CutoffFamily, MasterCutoff, PartitionCheck};
pub use grid::SpaceTimeGrid;
pub use weight::{check_geometry, CarlemanWeight, GammaCondition, GeometryReport, Strictness, MARGINAL_RTOL};
