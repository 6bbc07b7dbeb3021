//! Mean-anchored disk problem: clamped stream-function discretization,
//! homotopy in the forcing strength and damped Picard iteration.

mod solve;
mod space;

pub use solve::{
    assemble_linearized, forcing_load, solve_disk, solve_in_space, test_battery, weak_residual,
    DiscreteVelocity, DiskSolution, DiskSummary, IterateRecord, LinearizedSystem, SolutionChecks,
    SolveConfig,
};
pub use space::StreamSpace;
