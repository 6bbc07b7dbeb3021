//! Forcing data: direct tensor sources, compactly supported vector sources
//! with the zero-mean gate and their lift to a tensor, and manufactured
//! solutions with closed-form forcing.

mod bump;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use bump::{Bump, Jet3};

use crate::error::{Error, Result};
use crate::geometry::{
    inner_product_l2, l2_norm, vector_gradient, Field, PolarGrid, RegionSpec, ScalarField,
    TensorField, VectorField,
};
use crate::solver::StreamSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceKind {
    TensorDirect,
    VectorCompact,
    Manufactured,
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::TensorDirect => "tensor-direct",
            Self::VectorCompact => "vector-compact",
            Self::Manufactured => "manufactured",
        }
    }
}

/// A catalog source: a bump of radius `support_radius` at `center`, scaled by
/// `amplitude`, with a shape chosen by string id.
///
/// Shapes by kind:
/// * tensor-direct: `bump-identity`, `bump-shear`, `bump-swirl`, `bump-stretch`;
/// * vector-compact: `curl-bump`, `div-shear`, `net-force` (fails the gate);
/// * manufactured: `vortex` (stream `a β`), `dipole` (stream `a (d·e) β / ρ`).
///
/// `orientation` rotates the shape (radians) and `mu` is the constant part of
/// a manufactured velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    pub kind: SourceKind,
    pub shape: String,
    #[serde(default)]
    pub center: [f64; 2],
    pub support_radius: f64,
    pub amplitude: f64,
    #[serde(default)]
    pub orientation: f64,
    #[serde(default)]
    pub mu: [f64; 2],
}

impl SourceSpec {
    pub fn new(kind: SourceKind, shape: &str, center: [f64; 2], support_radius: f64, amplitude: f64) -> Self {
        Self {
            kind,
            shape: shape.to_string(),
            center,
            support_radius,
            amplitude,
            orientation: 0.0,
            mu: [0.0, 0.0],
        }
    }

    pub fn bump(&self) -> Bump {
        Bump::new(self.center, self.support_radius)
    }

    /// Largest distance from the origin reached by the support.
    pub fn extent(&self) -> f64 {
        self.center[0].hypot(self.center[1]) + self.support_radius
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_radius.is_finite() && self.support_radius > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "support radius must be positive and finite, got {}",
                self.support_radius
            )));
        }
        if !self.amplitude.is_finite() || !self.orientation.is_finite() {
            return Err(Error::InvalidConfig("amplitude and orientation must be finite".into()));
        }
        let known: &[&str] = match self.kind {
            SourceKind::TensorDirect => &["bump-identity", "bump-shear", "bump-swirl", "bump-stretch"],
            SourceKind::VectorCompact => &["curl-bump", "div-shear", "net-force"],
            SourceKind::Manufactured => &["vortex", "dipole"],
        };
        if !known.contains(&self.shape.as_str()) {
            return Err(Error::UnknownShape(self.shape.clone()));
        }
        Ok(())
    }

    fn check_grid(&self, grid: &PolarGrid) -> Result<()> {
        self.validate()?;
        if self.extent() > grid.radius() {
            return Err(Error::SourceOutsideGrid {
                support: self.extent(),
                radius: grid.radius(),
            });
        }
        Ok(())
    }

    fn rotation(&self) -> [[f64; 2]; 2] {
        let (s, c) = self.orientation.sin_cos();
        [[c, -s], [s, c]]
    }
}

fn rotate(q: [[f64; 2]; 2], t: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    let mut out = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for a in 0..2 {
                for b in 0..2 {
                    out[i][j] += q[i][a] * t[a][b] * q[j][b];
                }
            }
        }
    }
    out
}

/// A tensor forcing and its L² norm by grid quadrature.
#[derive(Debug, Clone)]
pub struct TensorSource {
    pub field: TensorField,
    pub l2_norm: f64,
}

/// Samples a tensor-direct or manufactured source.
pub fn build_tensor_source(spec: &SourceSpec, grid: &Arc<PolarGrid>) -> Result<TensorSource> {
    let field = match spec.kind {
        SourceKind::TensorDirect => {
            spec.check_grid(grid)?;
            let base = match spec.shape.as_str() {
                "bump-identity" => [[1.0, 0.0], [0.0, 1.0]],
                "bump-shear" => [[0.0, 1.0], [0.0, 0.0]],
                "bump-swirl" => [[0.0, -1.0], [1.0, 0.0]],
                "bump-stretch" => [[1.0, 0.0], [0.0, -1.0]],
                other => return Err(Error::UnknownShape(other.to_string())),
            };
            let t = rotate(spec.rotation(), base);
            let b = spec.bump();
            let a = spec.amplitude;
            TensorField::from_fn(grid, |x, y| {
                let s = a * b.value(x, y);
                [[s * t[0][0], s * t[0][1]], [s * t[1][0], s * t[1][1]]]
            })
        }
        SourceKind::Manufactured => manufacture_solution(spec, grid)?.forcing,
        SourceKind::VectorCompact => {
            return Err(Error::WrongSourceKind {
                kind: spec.kind.name(),
                operation: "build_tensor_source",
            })
        }
    };
    let l2_norm = l2_norm(&field, None)?;
    Ok(TensorSource { field, l2_norm })
}

/// Samples a vector-compact source `f`.
pub fn build_vector_source(spec: &SourceSpec, grid: &Arc<PolarGrid>) -> Result<VectorField> {
    if spec.kind != SourceKind::VectorCompact {
        return Err(Error::WrongSourceKind {
            kind: spec.kind.name(),
            operation: "build_vector_source",
        });
    }
    spec.check_grid(grid)?;
    let b = spec.bump();
    let a = spec.amplitude;
    let q = spec.rotation();
    let shape = spec.shape.clone();
    Ok(VectorField::from_fn(grid, |x, y| {
        let jet = b.jet(x, y);
        let g = jet.grad;
        match shape.as_str() {
            "curl-bump" => [a * g[1], -a * g[0]],
            "div-shear" => {
                // ∇·(β S) with S the rotated symmetric shear
                let s = rotate(q, [[0.0, 1.0], [1.0, 0.0]]);
                [
                    a * (s[0][0] * g[0] + s[0][1] * g[1]),
                    a * (s[1][0] * g[0] + s[1][1] * g[1]),
                ]
            }
            _ => {
                let e = [q[0][0], q[1][0]];
                [a * jet.value * e[0], a * jet.value * e[1]]
            }
        }
    }))
}

/// Exact velocity and forcing of a catalog solution `u = μ + ∇⊥ψ`.
#[derive(Debug, Clone)]
pub struct Manufactured {
    /// Stream function `ψ` (without the constant part).
    pub stream: ScalarField,
    pub u_exact: VectorField,
    /// `F = ∇w − w ⊗ u` with `w = ∇⊥ψ`, so the weak form holds for `u`.
    pub forcing: TensorField,
    /// `f = ∇·F = Δw − u·∇w`.
    pub divergence: VectorField,
}

fn stream_jet(spec: &SourceSpec, x: f64, y: f64) -> Jet3 {
    let b = spec.bump();
    let jet = b.jet(x, y);
    match spec.shape.as_str() {
        "dipole" => {
            let (s, c) = spec.orientation.sin_cos();
            let rho = spec.support_radius;
            let p = ((x - spec.center[0]) * c + (y - spec.center[1]) * s) / rho;
            jet.times_affine(p, [c / rho, s / rho]).scale(spec.amplitude)
        }
        _ => jet.scale(spec.amplitude),
    }
}

/// Closed-form manufactured solution for a catalog shape.
pub fn manufacture_solution(spec: &SourceSpec, grid: &Arc<PolarGrid>) -> Result<Manufactured> {
    if spec.kind != SourceKind::Manufactured {
        return Err(Error::WrongSourceKind {
            kind: spec.kind.name(),
            operation: "manufacture_solution",
        });
    }
    spec.check_grid(grid)?;
    let mu = spec.mu;
    let n = grid.node_count();
    let mut stream = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    let mut div = Vec::with_capacity(n);
    for k in 0..n {
        let [x, y] = grid.position(k);
        let j = stream_jet(spec, x, y);
        stream.push(j.value);
        // w = (ψ_y, −ψ_x); gw[i][m] = ∂_m w_i
        let w = [j.grad[1], -j.grad[0]];
        let gw = [[j.hess[1][0], j.hess[1][1]], [-j.hess[0][0], -j.hess[0][1]]];
        let lap_w = [
            j.third[1][0][0] + j.third[1][1][1],
            -(j.third[0][0][0] + j.third[0][1][1]),
        ];
        let uu = [mu[0] + w[0], mu[1] + w[1]];
        u.push(uu);
        f.push([
            [gw[0][0] - w[0] * uu[0], gw[0][1] - w[0] * uu[1]],
            [gw[1][0] - w[1] * uu[0], gw[1][1] - w[1] * uu[1]],
        ]);
        div.push([
            lap_w[0] - (uu[0] * gw[0][0] + uu[1] * gw[0][1]),
            lap_w[1] - (uu[0] * gw[1][0] + uu[1] * gw[1][1]),
        ]);
    }
    Ok(Manufactured {
        stream: ScalarField::new(grid, stream)?,
        u_exact: VectorField::new(grid, u)?,
        forcing: TensorField::new(grid, f)?,
        divergence: VectorField::new(grid, div)?,
    })
}

/// The tensor forcing of any catalog source on a grid: sampled directly for
/// tensor-direct and manufactured kinds, lifted through the zero-mean gate for
/// vector-compact ones.
pub fn build_forcing(spec: &SourceSpec, grid: &Arc<PolarGrid>, omega: &RegionSpec) -> Result<TensorField> {
    match spec.kind {
        SourceKind::VectorCompact => {
            let f = build_vector_source(spec, grid)?;
            Ok(lift_vector_source(&f, grid, omega)?.forcing)
        }
        _ => Ok(build_tensor_source(spec, grid)?.field),
    }
}

/// Result of lifting a vector source to a tensor.
#[derive(Debug, Clone)]
pub struct LiftedSource {
    pub forcing: TensorField,
    /// Stream function of the Riesz representative `u` with `F = −∇u`.
    pub stream: Vec<f64>,
    pub integrals: [f64; 2],
    pub l1_norm: f64,
}

/// Relative tolerance of the zero-mean gate.
pub const ZERO_MEAN_TOLERANCE: f64 = 1e-8;

/// Componentwise `∫ f` and `∫ |f|` for a source supported inside the grid disk.
pub fn source_integrals(f: &VectorField) -> ([f64; 2], f64) {
    let grid = f.grid();
    let x = f.component_vec(0);
    let y = f.component_vec(1);
    let magnitude: Vec<f64> = f.values().iter().map(|v| v[0].hypot(v[1])).collect();
    (
        [grid.integrate_compact(&x), grid.integrate_compact(&y)],
        grid.integrate_compact(&magnitude),
    )
}

/// Lifts a compactly supported `f` with zero net force to `F` with
/// `⟨f, φ⟩ = −⟨F, ∇φ⟩` for solenoidal `φ` vanishing on the boundary.
///
/// Solves `⟨∇u, ∇ψ⟩ = ⟨f, ψ⟩` in the clamped stream space and returns
/// `F = −∇u`. Fails the gate when `|∫ f_c| > 1e-8 ∫ |f|` for either component.
pub fn lift_vector_source(
    f: &VectorField,
    grid: &Arc<PolarGrid>,
    omega: &RegionSpec,
) -> Result<LiftedSource> {
    crate::geometry::check_same_grid(f.grid(), grid)?;
    omega.pair_with(grid)?;
    let (integrals, l1_norm) = source_integrals(f);
    let tolerance = ZERO_MEAN_TOLERANCE * l1_norm;
    for (component, &integral) in integrals.iter().enumerate() {
        if integral.abs() > tolerance {
            return Err(Error::ZeroMeanGate {
                component,
                integral,
                tolerance,
            });
        }
    }
    let space = StreamSpace::new(grid)?;
    lift_in_space(&space, f, integrals, l1_norm)
}

pub(crate) fn lift_in_space(
    space: &StreamSpace,
    f: &VectorField,
    integrals: [f64; 2],
    l1_norm: f64,
) -> Result<LiftedSource> {
    let grid = space.grid();
    let w = grid.quadrature_weights();
    let fx: Vec<f64> = f.values().iter().zip(&w).map(|(v, w)| w * v[0]).collect();
    let fy: Vec<f64> = f.values().iter().zip(&w).map(|(v, w)| w * v[1]).collect();
    let rhs = space.velocity_adjoint(&fx, &fy);
    let stream = space.stokes_solve(&rhs);
    let u = space.velocity(&stream);
    let forcing = vector_gradient(&u).scale(-1.0);
    Ok(LiftedSource {
        forcing,
        stream,
        integrals,
        l1_norm,
    })
}

/// `(⟨f, φ⟩ + ⟨F, ∇φ⟩) / (‖f‖ ‖∇φ‖)` for the velocity `φ = ∇⊥χ` of a clamped stream.
pub fn pairing_residual(space: &StreamSpace, f: &VectorField, forcing: &TensorField, chi: &[f64]) -> Result<f64> {
    let phi = space.velocity(chi);
    let grad = vector_gradient(&phi);
    let num = inner_product_l2(f, &phi, None)? + inner_product_l2(forcing, &grad, None)?;
    let denom = l2_norm(f, None)? * l2_norm(&grad, None)?;
    Ok(if denom == 0.0 { num.abs() } else { num.abs() / denom })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_polar_grid;

    #[test]
    fn zero_amplitude_gives_zero_tensor() {
        let g = make_polar_grid(2.0, 16, 32).unwrap();
        let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.2, 0.1], 0.8, 0.0);
        let src = build_tensor_source(&spec, &g).unwrap();
        assert!(src.field.is_zero());
        assert_eq!(src.l2_norm, 0.0);
    }

    #[test]
    fn norm_scales_linearly_in_amplitude() {
        let g = make_polar_grid(2.0, 32, 64).unwrap();
        let mut spec = SourceSpec::new(SourceKind::TensorDirect, "bump-swirl", [0.2, 0.1], 0.8, 1.0);
        let n1 = build_tensor_source(&spec, &g).unwrap().l2_norm;
        spec.amplitude = -3.0;
        let n3 = build_tensor_source(&spec, &g).unwrap().l2_norm;
        assert!((n3 - 3.0 * n1).abs() < 1e-12 * n3);
    }

    #[test]
    fn support_must_fit_in_grid() {
        let g = make_polar_grid(1.0, 16, 32).unwrap();
        let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.5, 0.0], 0.8, 1.0);
        assert!(matches!(build_tensor_source(&spec, &g), Err(Error::SourceOutsideGrid { .. })));
        let bad = SourceSpec::new(SourceKind::Manufactured, "spiral", [0.0, 0.0], 0.5, 1.0);
        assert!(matches!(manufacture_solution(&bad, &g), Err(Error::UnknownShape(_))));
    }

    #[test]
    fn manufactured_zero_amplitude_is_constant() {
        let g = make_polar_grid(2.0, 16, 32).unwrap();
        let mut spec = SourceSpec::new(SourceKind::Manufactured, "vortex", [0.0, 0.0], 1.0, 0.0);
        spec.mu = [1.0, -0.5];
        let m = manufacture_solution(&spec, &g).unwrap();
        assert!(m.forcing.is_zero());
        assert!(m.u_exact.values().iter().all(|v| *v == [1.0, -0.5]));
    }

    #[test]
    fn gate_rejects_net_force() {
        let g = make_polar_grid(2.0, 32, 64).unwrap();
        let spec = SourceSpec::new(SourceKind::VectorCompact, "net-force", [0.1, 0.0], 0.8, 1.0);
        let f = build_vector_source(&spec, &g).unwrap();
        let err = lift_vector_source(&f, &g, &RegionSpec::centered_disk(0.5)).unwrap_err();
        assert!(matches!(err, Error::ZeroMeanGate { component: 0, .. }));
    }

    #[test]
    fn zero_source_lifts_to_zero() {
        let g = make_polar_grid(2.0, 16, 32).unwrap();
        let f = VectorField::zeros(&g);
        let lift = lift_vector_source(&f, &g, &RegionSpec::centered_disk(0.5)).unwrap();
        assert!(lift.forcing.is_zero());
    }
}
