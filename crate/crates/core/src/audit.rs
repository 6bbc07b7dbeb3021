//! Weak-strong uniqueness audit: decay envelopes, the contraction factor
//! `C δ` built from the anchored Hardy constant, solver-level coincidence of
//! independent runs, and the skew-symmetry of the convective form.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{mean_over, vector_gradient, Field, PolarGrid, RegionSpec, VectorField};
use crate::solver::DiskSolution;
use crate::weighted::{estimate_hardy_constant, weight_radial};

/// Relative tolerance on the anchor means of the two audited runs.
pub const MEAN_GAP_TOL: f64 = 1e-8;

/// Allowed growth of `δ` along a ladder before it is flagged non-uniform.
pub const ENVELOPE_GROWTH_TOL: f64 = 0.1;

/// Half-width of the radial finite-difference stencils used by the skew check.
const RADIAL_HALF_WIDTH: usize = 5;

/// Smallest `δ` with `|ũ(x) − u∞| ≤ δ / (⟨x⟩⟨log⟨x⟩⟩)` at every node.
pub fn measure_decay_envelope(u_tilde: &VectorField, u_inf: [f64; 2]) -> f64 {
    let grid = u_tilde.grid();
    u_tilde
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| {
            let x = grid.position(k);
            (v[0] - u_inf[0]).hypot(v[1] - u_inf[1]) / weight_radial(x[0].hypot(x[1]))
        })
        .fold(0.0, f64::max)
}

/// `δ` measured on each disk of a ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeProfile {
    pub radii: Vec<f64>,
    pub deltas: Vec<f64>,
    /// No `δ` exceeds the first by more than [`ENVELOPE_GROWTH_TOL`].
    pub uniform: bool,
}

pub fn envelope_profile(fields: &[&VectorField], u_inf: [f64; 2]) -> EnvelopeProfile {
    let deltas: Vec<f64> = fields.iter().map(|f| measure_decay_envelope(f, u_inf)).collect();
    let first = deltas.first().copied().unwrap_or(0.0);
    EnvelopeProfile {
        radii: fields.iter().map(|f| f.grid().radius()).collect(),
        uniform: deltas.iter().all(|&d| d <= first * (1.0 + ENVELOPE_GROWTH_TOL)),
        deltas,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    UniqueRegime,
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::UniqueRegime => "unique-regime",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub u_inf: [f64; 2],
    /// `sup |ũ − u∞| ⟨x⟩⟨log⟨x⟩⟩` over the grid.
    pub delta_measured: f64,
    /// Hardy constant anchored on `ω`.
    pub hardy_constant: f64,
    /// `C δ`.
    pub contraction_factor: f64,
    /// `‖∇(u − ũ)‖_{L²}`.
    pub grad_d_norm: f64,
    /// `⨍_ω u − ⨍_ω ũ`.
    pub mean_gap: [f64; 2],
    pub mean_gap_tolerance: f64,
    /// Bound on `grad_d_norm` asserted in the unique regime.
    pub coincidence_tolerance: f64,
    pub verdict: Verdict,
}

impl UniquenessReport {
    pub fn verdict_line(&self) -> String {
        format!(
            "verdict: {} (C = {:.6}, delta = {:.6e}, C*delta = {:.6e}, |grad d| = {:.3e})",
            self.verdict.name(),
            self.hardy_constant,
            self.delta_measured,
            self.contraction_factor,
            self.grad_d_norm
        )
    }
}

/// Audits two solutions of the same anchored problem.
///
/// Fails with [`Error::MeanGap`] when the anchor means differ, and with
/// [`Error::Invariant`] when the verdict is `unique-regime` but the runs do not
/// coincide to `10 · picard_tol · max(1, ‖F‖)`.
pub fn audit_pair(
    u: &DiskSolution,
    u_tilde: &DiskSolution,
    u_inf: [f64; 2],
    omega: &RegionSpec,
) -> Result<UniquenessReport> {
    let grid = &u.grid;
    if !grid.same_layout(&u_tilde.grid) {
        return Err(Error::GridMismatch);
    }
    let scale = 1.0 + u.mu[0].hypot(u.mu[1]).max(u_tilde.mu[0].hypot(u_tilde.mu[1]));
    let (m, mt) = (mean_over(&u.u, omega)?, mean_over(&u_tilde.u, omega)?);
    let mean_gap = [m[0] - mt[0], m[1] - mt[1]];
    let gap = mean_gap[0].hypot(mean_gap[1]);
    let mean_gap_tolerance = MEAN_GAP_TOL * scale;
    if gap > mean_gap_tolerance {
        return Err(Error::MeanGap {
            gap,
            tolerance: mean_gap_tolerance,
        });
    }

    let d = u.u.sub(&u_tilde.u)?;
    let grad = vector_gradient(&d);
    let w = grid.quadrature_weights();
    let grad_d_norm = grad
        .values()
        .iter()
        .zip(&w)
        .map(|(g, wk)| wk * (g[0][0].powi(2) + g[0][1].powi(2) + g[1][0].powi(2) + g[1][1].powi(2)))
        .sum::<f64>()
        .sqrt();

    let delta_measured = measure_decay_envelope(&u_tilde.u, u_inf);
    let hardy_constant = estimate_hardy_constant(grid, omega)?.value;
    let contraction_factor = hardy_constant * delta_measured;
    let verdict = if contraction_factor < 1.0 {
        Verdict::UniqueRegime
    } else {
        Verdict::Inconclusive
    };
    let coincidence_tolerance =
        10.0 * u.picard_tol.max(u_tilde.picard_tol) * u.forcing_norm.max(u_tilde.forcing_norm).max(1.0);
    if verdict == Verdict::UniqueRegime && grad_d_norm > coincidence_tolerance {
        return Err(Error::Invariant(format!(
            "contraction factor {contraction_factor:.3e} < 1 but the runs differ by {grad_d_norm:.3e} \
             (tolerance {coincidence_tolerance:.3e})"
        )));
    }
    Ok(UniquenessReport {
        radius: grid.radius(),
        n_r: grid.n_r(),
        n_theta: grid.n_theta(),
        u_inf,
        delta_measured,
        hardy_constant,
        contraction_factor,
        grad_d_norm,
        mean_gap,
        mean_gap_tolerance,
        coincidence_tolerance,
        verdict,
    })
}

/// Outcome of [`check_skew_symmetry`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkewSymmetry {
    /// `⟨u·∇ṽ, ṽ⟩ − ½∮ (u·n)|ṽ|²`, zero for solenoidal `u`.
    pub value: f64,
    /// `‖∇ṽ‖ ‖u ṽ‖`.
    pub scale: f64,
    pub relative: f64,
}

/// Integration-by-parts defect of the convective form on the grid disk.
///
/// Derivatives are spectral in `θ` and high order along the diameters, so the
/// defect of smooth solenoidal data sits far below the solver's second-order
/// truncation error.
pub fn check_skew_symmetry(u: &VectorField, v_tilde: &VectorField) -> Result<SkewSymmetry> {
    crate::geometry::check_same_grid(u.grid(), v_tilde.grid())?;
    let grid = u.grid();
    let d = AccurateDerivatives::new(grid);
    let comps = [v_tilde.component_vec(0), v_tilde.component_vec(1)];
    let grads: Vec<[Vec<f64>; 2]> = comps.iter().map(|c| d.gradient(c)).collect();
    let w = disk_weights(grid);
    let (uv, vv) = (u.values(), v_tilde.values());
    let (mut volume, mut grad2, mut uv2) = (0.0, 0.0, 0.0);
    for k in 0..grid.node_count() {
        for c in 0..2 {
            let adv = uv[k][0] * grads[c][0][k] + uv[k][1] * grads[c][1][k];
            volume += w[k] * adv * vv[k][c];
            grad2 += w[k] * (grads[c][0][k].powi(2) + grads[c][1][k].powi(2));
        }
        let speed2 = uv[k][0].powi(2) + uv[k][1].powi(2);
        uv2 += w[k] * speed2 * (vv[k][0].powi(2) + vv[k][1].powi(2));
    }
    let outer = grid.n_r() - 1;
    let radius = grid.radius();
    let boundary: f64 = (0..grid.n_theta())
        .map(|j| {
            let k = grid.index(outer, j);
            let un = uv[k][0] * grid.cos_theta()[j] + uv[k][1] * grid.sin_theta()[j];
            0.5 * un * (vv[k][0].powi(2) + vv[k][1].powi(2)) * radius * grid.dtheta()
        })
        .sum();
    let value = volume - boundary;
    let scale = grad2.sqrt() * uv2.sqrt();
    Ok(SkewSymmetry {
        value,
        scale,
        relative: if scale > 0.0 { value.abs() / scale } else { value.abs() },
    })
}

/// Bernoulli numbers `B_2, B_4, …, B_12`.
const BERNOULLI_EVEN: [f64; 6] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
];

/// Node weights (area units) with spectral accuracy on smooth integrands
/// supported inside the disk: angular trapezoid, radial midpoint sums with
/// pole corrections exact on even polynomials in `r`, and a fourth-order end
/// rule on the boundary ring.
fn disk_weights(grid: &PolarGrid) -> Vec<f64> {
    let (nr, h) = (grid.n_r(), grid.h());
    let r = grid.radial_nodes();
    let mut ring: Vec<f64> = r.iter().map(|ri| h * ri).collect();
    // h Σ (i+½)^{2m+1} regularizes to h ζ(−2m−1, ½); cancel it with weights
    // c_i h² on the first rings, s_i = (i + ½)².
    let p = BERNOULLI_EVEN.len().min(nr / 2);
    let mut vander = nalgebra::DMatrix::<f64>::zeros(p, p);
    let mut target = nalgebra::DVector::<f64>::zeros(p);
    for m in 0..p {
        for i in 0..p {
            vander[(m, i)] = (i as f64 + 0.5).powi(2 * m as i32);
        }
        let n = 2 * m + 2;
        target[m] = (2f64.powi(1 - n as i32) - 1.0) * BERNOULLI_EVEN[m] / n as f64;
    }
    let c = vander.lu().solve(&target).expect("nonsingular moment system");
    for i in 0..p {
        ring[i] += c[i] * h * h;
    }
    for (back, end) in [17.0 / 48.0, 59.0 / 48.0, 43.0 / 48.0, 49.0 / 48.0].iter().enumerate() {
        let i = nr - 1 - back;
        ring[i] += (end - 1.0) * h * r[i];
    }
    (0..grid.node_count())
        .map(|k| ring[grid.ring_of(k)] * grid.dtheta())
        .collect()
}

/// Finite-difference weights for the first derivative at `x0` (Fornberg).
fn derivative_weights(x0: f64, nodes: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Spectral angular and high-order radial derivatives on a polar grid.
struct AccurateDerivatives {
    grid: Arc<PolarGrid>,
    /// Per ring: (first line index, weights) along the diameter through the node.
    radial: Vec<(usize, Vec<f64>)>,
}

impl AccurateDerivatives {
    fn new(grid: &Arc<PolarGrid>) -> Self {
        let nr = grid.n_r();
        let h = grid.h();
        // diameter samples x_m = (m − n_r + ½) h, m = 0..2 n_r
        let line: Vec<f64> = (0..2 * nr).map(|m| (m as f64 - nr as f64 + 0.5) * h).collect();
        let width = (2 * RADIAL_HALF_WIDTH + 1).min(2 * nr);
        let radial = (0..nr)
            .map(|i| {
                let m = nr + i;
                let start = m.saturating_sub(RADIAL_HALF_WIDTH).min(2 * nr - width);
                (start, derivative_weights(line[m], &line[start..start + width]))
            })
            .collect();
        Self {
            grid: grid.clone(),
            radial,
        }
    }

    /// Node of the diameter through angle index `j` at line index `m`.
    fn line_node(&self, m: usize, j: usize) -> usize {
        let nr = self.grid.n_r();
        if m >= nr {
            self.grid.index(m - nr, j)
        } else {
            self.grid.index(nr - 1 - m, self.grid.opposite(j))
        }
    }

    fn d_r(&self, f: &[f64]) -> Vec<f64> {
        let g = &self.grid;
        let mut out = vec![0.0; f.len()];
        for (i, (start, weights)) in self.radial.iter().enumerate() {
            for j in 0..g.n_theta() {
                out[g.index(i, j)] = weights
                    .iter()
                    .enumerate()
                    .map(|(s, w)| w * f[self.line_node(start + s, j)])
                    .sum();
            }
        }
        out
    }

    fn d_theta(&self, f: &[f64]) -> Vec<f64> {
        let nt = self.grid.n_theta();
        let mut planner = FftPlanner::new();
        let (fwd, inv) = (planner.plan_fft_forward(nt), planner.plan_fft_inverse(nt));
        let mut out = vec![0.0; f.len()];
        for (ring, chunk) in f.chunks(nt).enumerate() {
            let mut buf: Vec<Complex64> = chunk.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fwd.process(&mut buf);
            for (k, b) in buf.iter_mut().enumerate() {
                let wave = if 2 * k < nt {
                    k as f64
                } else if 2 * k > nt {
                    k as f64 - nt as f64
                } else {
                    0.0
                };
                *b *= Complex64::new(0.0, wave / nt as f64);
            }
            inv.process(&mut buf);
            for (o, b) in out[ring * nt..(ring + 1) * nt].iter_mut().zip(&buf) {
                *o = b.re;
            }
        }
        out
    }

    /// Cartesian gradient `[∂x f, ∂y f]`.
    fn gradient(&self, f: &[f64]) -> [Vec<f64>; 2] {
        let g = &self.grid;
        let (fr, ft) = (self.d_r(f), self.d_theta(f));
        let nt = g.n_theta();
        let mut gx = vec![0.0; f.len()];
        let mut gy = vec![0.0; f.len()];
        for k in 0..f.len() {
            let (i, j) = (k / nt, k % nt);
            let (c, s, r) = (g.cos_theta()[j], g.sin_theta()[j], g.radial_nodes()[i]);
            gx[k] = c * fr[k] - s * ft[k] / r;
            gy[k] = s * fr[k] + c * ft[k] / r;
        }
        [gx, gy]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_polar_grid;
    use crate::weighted::weight_w;

    fn bump(x: f64, y: f64, c: [f64; 2], rho: f64) -> (f64, [f64; 2]) {
        let q = ((x - c[0]).powi(2) + (y - c[1]).powi(2)) / (rho * rho);
        if q >= 1.0 {
            return (0.0, [0.0, 0.0]);
        }
        let e = (1.0 / (q - 1.0)).exp();
        let dq = -e / (q - 1.0).powi(2);
        let s = 2.0 / (rho * rho);
        (e, [dq * s * (x - c[0]), dq * s * (y - c[1])])
    }

    /// `∇⊥` of a bump stream function.
    fn swirl(grid: &Arc<PolarGrid>, c: [f64; 2], rho: f64, amp: f64) -> VectorField {
        VectorField::from_fn(grid, |x, y| {
            let (_, g) = bump(x, y, c, rho);
            [amp * g[1], -amp * g[0]]
        })
    }

    #[test]
    fn envelope_examples() {
        let grid = make_polar_grid(20.0, 40, 32).unwrap();
        let u_inf = [0.3, -1.0];
        assert_eq!(measure_decay_envelope(&VectorField::constant(&grid, u_inf), u_inf), 0.0);
        let saturated = VectorField::from_fn(&grid, |x, y| [u_inf[0] + weight_w([x, y]), u_inf[1]]);
        assert!((measure_decay_envelope(&saturated, u_inf) - 1.0).abs() < 1e-12);
        let g = VectorField::from_fn(&grid, |x, y| [u_inf[0] + (x * y).sin() * weight_w([x, y]), u_inf[1] + 0.1]);
        let base = measure_decay_envelope(&g, u_inf);
        let scaled = VectorField::from_fn(&grid, |x, y| {
            [u_inf[0] - 2.5 * (x * y).sin() * weight_w([x, y]), u_inf[1] - 0.25]
        });
        assert!((measure_decay_envelope(&scaled, u_inf) - 2.5 * base).abs() < 1e-12 * base);
    }

    #[test]
    fn slow_decay_is_flagged_non_uniform() {
        let u_inf = [1.0, 0.0];
        let fields: Vec<VectorField> = [4.0, 16.0, 64.0]
            .iter()
            .map(|&r| {
                let grid = make_polar_grid(r, 32, 16).unwrap();
                VectorField::from_fn(&grid, |x, y| [1.0 + (1.0 + x.hypot(y)).powf(-0.5), 0.0])
            })
            .collect();
        let refs: Vec<&VectorField> = fields.iter().collect();
        let profile = envelope_profile(&refs, u_inf);
        assert!(profile.deltas.windows(2).all(|w| w[1] > w[0]));
        assert!(!profile.uniform);
        let decaying: Vec<VectorField> = fields
            .iter()
            .map(|f| VectorField::from_fn(f.grid(), |x, y| [1.0 + 0.5 * weight_w([x, y]), 0.0]))
            .collect();
        let refs: Vec<&VectorField> = decaying.iter().collect();
        assert!(envelope_profile(&refs, u_inf).uniform);
    }

    #[test]
    fn fornberg_weights_are_exact_on_polynomials() {
        let nodes: Vec<f64> = (0..7).map(|m| m as f64 * 0.3 - 0.4).collect();
        let w = derivative_weights(0.35, &nodes);
        for p in 0..7 {
            let d: f64 = w.iter().zip(&nodes).map(|(wi, x)| wi * x.powi(p)).sum();
            let exact = if p == 0 { 0.0 } else { p as f64 * 0.35f64.powi(p - 1) };
            assert!((d - exact).abs() < 1e-10, "p = {p}: {d} vs {exact}");
        }
    }

    #[test]
    fn accurate_gradient_of_smooth_field() {
        let grid = make_polar_grid(2.0, 48, 64).unwrap();
        let d = AccurateDerivatives::new(&grid);
        let f: Vec<f64> = (0..grid.node_count())
            .map(|k| {
                let [x, y] = grid.position(k);
                (0.7 * x).sin() * (0.4 * y + 0.2).cos()
            })
            .collect();
        let [gx, gy] = d.gradient(&f);
        for k in 0..grid.node_count() {
            let [x, y] = grid.position(k);
            let ex = 0.7 * (0.7 * x).cos() * (0.4 * y + 0.2).cos();
            let ey = -0.4 * (0.7 * x).sin() * (0.4 * y + 0.2).sin();
            assert!((gx[k] - ex).abs() < 1e-7 && (gy[k] - ey).abs() < 1e-7, "node {k}");
        }
    }

    #[test]
    fn skew_defect_vanishes_for_constant_advection() {
        let grid = make_polar_grid(1.5, 64, 128).unwrap();
        let u = VectorField::constant(&grid, [0.8, -0.6]);
        let v = swirl(&grid, [0.2, -0.1], 0.9, 1.0);
        let s = check_skew_symmetry(&u, &v).unwrap();
        assert!(s.scale > 0.1);
        assert!(s.relative < 1e-6, "relative defect {:e}", s.relative);
        let zero = check_skew_symmetry(&u, &VectorField::zeros(&grid)).unwrap();
        assert_eq!(zero.value, 0.0);
    }

    #[test]
    fn skew_defect_detects_divergence() {
        let grid = make_polar_grid(1.5, 64, 128).unwrap();
        let v = swirl(&grid, [0.0, 0.0], 1.0, 1.0);
        let solenoidal = swirl(&grid, [0.3, 0.1], 1.2, 0.5).add_constant([0.2, 0.0]);
        let radial = VectorField::from_fn(&grid, |x, y| [0.5 * x, 0.5 * y]).add_constant([0.2, 0.0]);
        let good = check_skew_symmetry(&solenoidal, &v).unwrap();
        let bad = check_skew_symmetry(&radial, &v).unwrap();
        assert!(good.relative < 1e-6, "{:e}", good.relative);
        // div = 1: defect is −½∫|ṽ|²
        let half_mass: f64 = 0.5
            * v.values()
                .iter()
                .zip(disk_weights(&grid))
                .map(|(x, w)| w * (x[0] * x[0] + x[1] * x[1]))
                .sum::<f64>();
        assert!((bad.value + half_mass).abs() < 1e-3 * half_mass, "{} {}", bad.value, half_mass);
        assert!(bad.relative > 0.1);
    }
}
