use std::sync::Arc;

use super::grid::{PolarGrid, Stencil};
use crate::error::{Error, Result};

/// Grid-sampled data with a fixed number of real components per node.
pub trait Field {
    const COMPONENTS: usize;

    fn grid(&self) -> &Arc<PolarGrid>;

    fn component(&self, node: usize, c: usize) -> f64;

    /// Column names used by the CSV writer.
    fn component_names() -> &'static [&'static str];

    fn is_finite(&self) -> bool {
        let n = self.grid().node_count();
        (0..n).all(|k| (0..Self::COMPONENTS).all(|c| self.component(k, c).is_finite()))
    }

    /// Interpolated component values at the point described by `stencil`.
    fn interpolate(&self, stencil: &Stencil, c: usize) -> f64 {
        stencil
            .nodes
            .iter()
            .zip(&stencil.weights)
            .map(|(&n, &w)| w * self.component(n, c))
            .sum()
    }
}

pub(crate) fn check_same_grid(a: &PolarGrid, b: &PolarGrid) -> Result<()> {
    if std::ptr::eq(a, b) || a.same_layout(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn check_len(grid: &PolarGrid, len: usize) -> Result<()> {
    if len != grid.node_count() {
        return Err(Error::InvalidGrid(format!(
            "expected {} samples, got {len}",
            grid.node_count()
        )));
    }
    Ok(())
}

fn non_finite() -> Error {
    Error::Invariant("field contains non-finite samples".into())
}

#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<PolarGrid>,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![0.0; grid.node_count()],
        }
    }

    pub fn new(grid: &Arc<PolarGrid>, values: Vec<f64>) -> Result<Self> {
        check_len(grid, values.len())?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(non_finite());
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.position(k);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl Field for ScalarField {
    const COMPONENTS: usize = 1;

    fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    fn component(&self, node: usize, _c: usize) -> f64 {
        self.values[node]
    }

    fn component_names() -> &'static [&'static str] {
        &["value"]
    }
}

/// Cartesian vector samples `(v_x, v_y)` per node.
#[derive(Debug, Clone)]
pub struct VectorField {
    grid: Arc<PolarGrid>,
    values: Vec<[f64; 2]>,
}

impl VectorField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self::constant(grid, [0.0, 0.0])
    }

    pub fn constant(grid: &Arc<PolarGrid>, value: [f64; 2]) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![value; grid.node_count()],
        }
    }

    pub fn new(grid: &Arc<PolarGrid>, values: Vec<[f64; 2]>) -> Result<Self> {
        check_len(grid, values.len())?;
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(non_finite());
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_components(grid: &Arc<PolarGrid>, x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidGrid("component lengths differ".into()));
        }
        Self::new(grid, x.iter().zip(y).map(|(&a, &b)| [a, b]).collect())
    }

    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> [f64; 2]) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.position(k);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn values(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub fn component_vec(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|v| v[c]).collect()
    }

    /// Pointwise Euclidean magnitude maximized over nodes.
    pub fn max_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v[0].hypot(v[1])))
    }

    pub fn add_constant(&self, c: [f64; 2]) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| [v[0] + c[0], v[1] + c[1]]).collect(),
        }
    }

    pub fn sub(&self, other: &VectorField) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| [a[0] - b[0], a[1] - b[1]])
                .collect(),
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| [s * v[0], s * v[1]]).collect(),
        }
    }
}

impl Field for VectorField {
    const COMPONENTS: usize = 2;

    fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    fn component(&self, node: usize, c: usize) -> f64 {
        self.values[node][c]
    }

    fn component_names() -> &'static [&'static str] {
        &["x", "y"]
    }
}

/// 2×2 samples per node; `values[k][i][j]` is the `(i, j)` entry.
#[derive(Debug, Clone)]
pub struct TensorField {
    grid: Arc<PolarGrid>,
    values: Vec<[[f64; 2]; 2]>,
}

impl TensorField {
    pub fn zeros(grid: &Arc<PolarGrid>) -> Self {
        Self {
            grid: grid.clone(),
            values: vec![[[0.0; 2]; 2]; grid.node_count()],
        }
    }

    pub fn new(grid: &Arc<PolarGrid>, values: Vec<[[f64; 2]; 2]>) -> Result<Self> {
        check_len(grid, values.len())?;
        if values.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(non_finite());
        }
        Ok(Self {
            grid: grid.clone(),
            values,
        })
    }

    pub fn from_fn(grid: &Arc<PolarGrid>, f: impl Fn(f64, f64) -> [[f64; 2]; 2]) -> Self {
        let values = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.position(k);
                f(x, y)
            })
            .collect();
        Self {
            grid: grid.clone(),
            values,
        }
    }

    pub fn values(&self) -> &[[[f64; 2]; 2]] {
        &self.values
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .map(|t| [[s * t[0][0], s * t[0][1]], [s * t[1][0], s * t[1][1]]])
                .collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().flatten().all(|&v| v == 0.0)
    }
}

impl Field for TensorField {
    const COMPONENTS: usize = 4;

    fn grid(&self) -> &Arc<PolarGrid> {
        &self.grid
    }

    fn component(&self, node: usize, c: usize) -> f64 {
        self.values[node][c / 2][c % 2]
    }

    fn component_names() -> &'static [&'static str] {
        &["xx", "xy", "yx", "yy"]
    }
}
