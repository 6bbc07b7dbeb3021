//! Linear solvers shared by the disk solver, the source lift and the
//! constant estimators.

mod circulant;
mod gmres;

pub use circulant::BlockCirculantSolver;
pub use gmres::{gmres, KrylovStats};
