use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Field, ScalarField, VectorField};

/// Path dependence allowed by [`reconstruct_stream`], relative to `‖v‖∞ · R`.
pub const PATH_TOLERANCE: f64 = 1e-2;

/// Weights of `∫_0^{h/2}` for the cubic through samples at `−3h/2, −h/2, h/2, 3h/2`, in units of `h`.
const POLE_WEIGHTS: [f64; 4] = [-7.0 / 384.0, 53.0 / 384.0, 155.0 / 384.0, -9.0 / 384.0];

/// Cumulative integral of uniformly spaced samples with local cubics, so that
/// `out[k] = ∫_{x_0}^{x_k}`. Needs at least four samples.
fn cumulative(g: &[f64], dx: f64) -> Vec<f64> {
    let m = g.len();
    let mut out = vec![0.0; m];
    for k in 0..m - 1 {
        let step = if k == 0 {
            9.0 * g[0] + 19.0 * g[1] - 5.0 * g[2] + g[3]
        } else if k + 2 == m {
            g[k - 2] - 5.0 * g[k - 1] + 19.0 * g[k] + 9.0 * g[k + 1]
        } else {
            -g[k - 1] + 13.0 * g[k] + 13.0 * g[k + 1] - g[k + 2]
        };
        out[k + 1] = out[k] + dx / 24.0 * step;
    }
    out
}

/// Periodic antiderivative by Fourier series: `out[k] = ∫_{θ_0}^{θ_k} g`, exact
/// for trigonometric polynomials resolved by the ring. A nonzero mean
/// contributes its linear part.
fn cumulative_periodic(g: &[f64], dtheta: f64) -> Vec<f64> {
    let n = g.len();
    let mut spec: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut spec);
    let mean = spec[0].re / n as f64;
    let mut anti = vec![Complex64::new(0.0, 0.0); n];
    for (k, c) in spec.iter().enumerate().skip(1) {
        // the Nyquist mode integrates to sin(nθ/2), which vanishes at every node
        if 2 * k == n {
            continue;
        }
        let m = if 2 * k < n { k as f64 } else { k as f64 - n as f64 };
        anti[k] = c / Complex64::new(0.0, m);
    }
    let offset: Complex64 = anti.iter().sum();
    FftPlanner::new().plan_fft_inverse(n).process(&mut anti);
    (0..n)
        .map(|j| (anti[j] - offset).re / n as f64 + mean * j as f64 * dtheta)
        .collect()
}

/// `v⊥ = (−v_y, v_x)`, so that `∇ψ = v⊥` when `v = ∇⊥ψ`.
#[inline]
fn perp(v: [f64; 2]) -> [f64; 2] {
    [-v[1], v[0]]
}

/// `∫ v⊥·dx` from the origin along the straight ray through angle index `j`,
/// evaluated at every ring.
fn ray_integral(v: &VectorField, j: usize) -> Vec<f64> {
    let grid = v.grid();
    let (c, s) = (grid.cos_theta()[j], grid.sin_theta()[j]);
    let opp = grid.opposite(j);
    let along = |i: usize, jj: usize| {
        let p = perp(v.values()[grid.index(i, jj)]);
        p[0] * c + p[1] * s
    };
    let h = grid.h();
    // samples at ±h/2, ±3h/2 straddle the pole along the full line
    let pole = [along(1, opp), along(0, opp), along(0, j), along(1, j)];
    let start: f64 = h * POLE_WEIGHTS.iter().zip(&pole).map(|(w, g)| w * g).sum::<f64>();
    let mut line = Vec::with_capacity(grid.n_r() + 1);
    line.push(along(0, opp));
    line.extend((0..grid.n_r()).map(|i| along(i, j)));
    // the ghost sample behind the first ring makes the first interval centered
    let cum = cumulative(&line, h);
    (0..grid.n_r()).map(|i| start + cum[i + 1] - cum[1]).collect()
}

/// Stream function of `v` by path integration along straight rays from the origin.
pub fn stream_along_rays(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let n = grid.n_theta();
    let mut values = vec![0.0; grid.node_count()];
    for j in 0..n {
        for (i, val) in ray_integral(v, j).into_iter().enumerate() {
            values[grid.index(i, j)] = val;
        }
    }
    ScalarField::new(grid, values).expect("finite path integrals of a finite field")
}

fn stream_canonical(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let n = grid.n_theta();
    let radial = ray_integral(v, 0);
    let mut values = vec![0.0; grid.node_count()];
    for (i, &r) in grid.radial_nodes().iter().enumerate() {
        // ∂_θψ = r v⊥·e_θ
        let g: Vec<f64> = (0..n)
            .map(|j| {
                let p = perp(v.values()[grid.index(i, j)]);
                r * (-p[0] * grid.sin_theta()[j] + p[1] * grid.cos_theta()[j])
            })
            .collect();
        let arc = cumulative_periodic(&g, grid.dtheta());
        for j in 0..n {
            values[grid.index(i, j)] = radial[i] + arc[j];
        }
    }
    ScalarField::new(grid, values).expect("finite path integrals of a finite field")
}

/// Largest nodal difference between the radial-then-angular and the straight-ray stream functions.
pub fn stream_path_discrepancy(v: &VectorField) -> f64 {
    let a = stream_canonical(v);
    let b = stream_along_rays(v);
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `ψ̃(x) = ∫_0^x v⊥·dx` along the radial-then-angular path (out along `θ = 0`,
/// then around the ring), with `ψ̃(0) = 0`.
///
/// Fails with [`Error::NotSolenoidal`] when the straight-ray path disagrees by
/// more than `PATH_TOLERANCE · ‖v‖∞ · R`.
pub fn reconstruct_stream(v: &VectorField) -> Result<ScalarField> {
    let grid = v.grid();
    let canonical = stream_canonical(v);
    let rays = stream_along_rays(v);
    let discrepancy = canonical
        .values()
        .iter()
        .zip(rays.values())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let tolerance = PATH_TOLERANCE * v.max_norm() * grid.radius();
    if discrepancy > tolerance {
        return Err(Error::NotSolenoidal {
            discrepancy,
            tolerance,
        });
    }
    Ok(canonical)
}
