//! Mean-anchored steady Navier–Stokes solutions in the plane by invading disks.
//!
//! The crate discretizes the disk problem with a clamped stream function on a
//! polar grid, continues it in the forcing strength with damped Picard sweeps,
//! and compares solutions across a growing radius ladder. Supporting modules
//! provide the weighted-space machinery (weight, cutoffs, Poincaré and Hardy
//! constants), source construction with the zero-mean gate, and an audit of the
//! weak-strong uniqueness inequality chain.

pub mod error;
pub mod audit;
pub mod cli;
pub mod geometry;
pub mod invading;
pub mod linalg;
pub mod solver;
pub mod sources;
pub mod sparse;
pub mod weighted;

pub use error::{Error, Result};
