use super::field::{check_same_grid, Field, ScalarField, TensorField, VectorField};
use super::region::RegionSpec;
use crate::error::Result;

/// Cartesian gradient `(∂x s, ∂y s)`.
pub fn gradient(s: &ScalarField) -> VectorField {
    let ops = s.grid().ops();
    let gx = ops.d_x.mul_vec(s.values());
    let gy = ops.d_y.mul_vec(s.values());
    VectorField::from_components(s.grid(), &gx, &gy).expect("same grid")
}

/// `(∂y s, −∂x s)`, the velocity of stream function `s`.
pub fn perp_gradient(s: &ScalarField) -> VectorField {
    let ops = s.grid().ops();
    let gy = ops.d_y.mul_vec(s.values());
    let gx: Vec<f64> = ops.d_x.mul_vec(s.values()).into_iter().map(|v| -v).collect();
    VectorField::from_components(s.grid(), &gy, &gx).expect("same grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let ops = v.grid().ops();
    let mut d = ops.d_x.mul_vec(&v.component_vec(0));
    let dy = ops.d_y.mul_vec(&v.component_vec(1));
    for (a, b) in d.iter_mut().zip(dy) {
        *a += b;
    }
    ScalarField::new(v.grid(), d).expect("finite")
}

/// Velocity gradient `G_ij = ∂_j v_i`.
pub fn vector_gradient(v: &VectorField) -> TensorField {
    let ops = v.grid().ops();
    let vx = v.component_vec(0);
    let vy = v.component_vec(1);
    let (xx, xy) = (ops.d_x.mul_vec(&vx), ops.d_y.mul_vec(&vx));
    let (yx, yy) = (ops.d_x.mul_vec(&vy), ops.d_y.mul_vec(&vy));
    let values = (0..xx.len())
        .map(|k| [[xx[k], xy[k]], [yx[k], yy[k]]])
        .collect();
    TensorField::new(v.grid(), values).expect("finite")
}

/// `∫ a·b` over the grid disk, or over `domain` when given.
pub fn inner_product_l2<F: Field>(a: &F, b: &F, domain: Option<&RegionSpec>) -> Result<f64> {
    check_same_grid(a.grid(), b.grid())?;
    let grid = a.grid();
    match domain {
        None => {
            let nt = grid.n_theta();
            let mut total = 0.0;
            for i in 0..grid.n_r() {
                let mut ring = 0.0;
                for j in 0..nt {
                    let k = grid.index(i, j);
                    for c in 0..F::COMPONENTS {
                        ring += a.component(k, c) * b.component(k, c);
                    }
                }
                total += grid.ring_weight(i) * ring;
            }
            Ok(total)
        }
        Some(region) => {
            let paired = region.pair_with(grid)?;
            Ok(paired
                .points
                .iter()
                .map(|(st, w)| {
                    let dot: f64 = (0..F::COMPONENTS)
                        .map(|c| a.interpolate(st, c) * b.interpolate(st, c))
                        .sum();
                    w * dot
                })
                .sum())
        }
    }
}

pub fn l2_norm<F: Field>(a: &F, domain: Option<&RegionSpec>) -> Result<f64> {
    Ok(inner_product_l2(a, a, domain)?.max(0.0).sqrt())
}

/// Componentwise mean `⨍_ω v`.
pub fn mean_over(v: &VectorField, omega: &RegionSpec) -> Result<[f64; 2]> {
    let a = omega.mean_functional(v.grid())?;
    Ok(apply_mean(&a, v))
}

pub(crate) fn apply_mean(a: &[f64], v: &VectorField) -> [f64; 2] {
    let mut m = [0.0, 0.0];
    for (w, val) in a.iter().zip(v.values()) {
        m[0] += w * val[0];
        m[1] += w * val[1];
    }
    m
}
