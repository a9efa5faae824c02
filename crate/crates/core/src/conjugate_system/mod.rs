//! The conjugated discrete operator, the weighted quadratic form built on it and
//! the block-by-block minimisation.

mod band;
mod operator;
mod solve;
mod system;

pub use band::{norm2, pcg, relative_residual, BandCholesky, BandMatrix};
pub use operator::{ConjugateOperator, Stencil};
pub use solve::{
    block_rhs_vector, direct_minimize, initial_rate, progressive_minimize, solve_min, BlockRhs, BlockSummary, Execution,
    FactoredSystem, MinimizerResult, ProgressiveResult, SolverOptions,
};
pub use system::{assemble_system, QuadraticSystem, SystemOptions, TrialSpace};
