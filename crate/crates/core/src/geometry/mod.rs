//! Polar grids on origin-centered disks, sampled fields, finite-difference
//! operators and quadrature.

mod field;
mod grid;
mod io;
mod ops;
mod region;

pub use field::{Field, ScalarField, TensorField, VectorField};
pub(crate) use field::check_same_grid;
pub use grid::{
    make_polar_grid, DerivativeOps, GridMetadata, PolarGrid, Stencil, GRADING, MIN_ANGULAR_NODES,
    MIN_RADIAL_NODES,
};
pub use io::{field_to_csv, write_field_csv, write_grid_metadata};
pub(crate) use ops::apply_mean;
pub use ops::{
    divergence, gradient, inner_product_l2, l2_norm, mean_over, perp_gradient, vector_gradient,
};
pub use region::{gauss_legendre, PairedRegion, RegionSpec};
