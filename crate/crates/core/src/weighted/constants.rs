use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::weight_radial;
use crate::error::{Error, Result};
use crate::geometry::{PolarGrid, RegionSpec};
use crate::linalg::BlockCirculantSolver;
use crate::sparse::{axpy, dot, CsrBuilder, CsrMatrix};

const LANCZOS_MAX_STEPS: usize = 400;
const LANCZOS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Inequality {
    /// `‖u‖ ≤ C (‖∇u‖ + |⨍_λ u|)`.
    Poincare,
    /// `‖u 𝔴‖ ≤ C (‖∇u‖ + |⨍_λ u|)`.
    Hardy,
}

/// A discrete constant, valid for every nodal field on the grid it was computed on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantEstimate {
    pub inequality: Inequality,
    pub radius: f64,
    pub anchor: RegionSpec,
    pub value: f64,
    pub n_r: usize,
    pub n_theta: usize,
}

/// The three quadratic forms entering the inequalities, on scalar nodal fields.
///
/// The Dirichlet form is the compact edge form: radial differences across the
/// bands between rings, angular differences along rings, and chords through
/// the pole. Its kernel is exactly the constants, which the centered nodal
/// gradient (blind to the angular checkerboard) cannot offer.
#[derive(Debug)]
pub struct InequalityForms {
    grid: Arc<PolarGrid>,
    inequality: Inequality,
    /// Diagonal of the mass form (quadrature weight, times `𝔴²` for Hardy).
    mass: Vec<f64>,
    dirichlet: CsrMatrix,
    /// `⨍_λ u = anchorᵀ u`.
    anchor: Vec<f64>,
}

impl InequalityForms {
    pub fn new(grid: &Arc<PolarGrid>, anchor: &RegionSpec, inequality: Inequality) -> Result<Self> {
        let anchor = anchor.mean_functional(grid)?;
        let q = grid.quadrature_weights();
        let mass = match inequality {
            Inequality::Poincare => q,
            Inequality::Hardy => (0..grid.node_count())
                .map(|k| {
                    let w = weight_radial(grid.radial_nodes()[grid.ring_of(k)]);
                    q[k] * w * w
                })
                .collect(),
        };
        if mass.iter().any(|&m| m <= 0.0) {
            return Err(Error::Invariant("quadrature weights must be positive".into()));
        }
        Ok(Self {
            grid: grid.clone(),
            inequality,
            mass,
            dirichlet: dirichlet_matrix(grid),
            anchor,
        })
    }

    pub fn inequality(&self) -> Inequality {
        self.inequality
    }

    /// `‖u‖` or `‖u 𝔴‖`.
    pub fn mass_norm(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.mass).map(|(v, m)| m * v * v).sum::<f64>().sqrt()
    }

    /// Discrete `‖∇u‖` of the edge form.
    pub fn gradient_norm(&self, u: &[f64]) -> f64 {
        self.dirichlet.quad_form(u).max(0.0).sqrt()
    }

    pub fn anchor_mean(&self, u: &[f64]) -> f64 {
        dot(&self.anchor, u)
    }

    /// `lhs / (‖∇u‖ + |⨍u|)`: the smallest constant this field demands.
    pub fn ratio(&self, u: &[f64]) -> f64 {
        self.mass_norm(u) / (self.gradient_norm(u) + self.anchor_mean(u).abs())
    }

    /// `B u = S u + a (aᵀ u)`.
    fn denominator_apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.dirichlet.mul_vec(u);
        axpy(self.anchor_mean(u), &self.anchor, &mut out);
        out
    }
}

fn dirichlet_matrix(grid: &PolarGrid) -> CsrMatrix {
    let n = grid.n_theta();
    let nr = grid.n_r();
    let h = grid.h();
    let dt = grid.dtheta();
    let r = grid.radial_nodes();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); grid.node_count()];
    let mut edge = |a: usize, b: usize, w: f64| {
        rows[a].push((a, w));
        rows[a].push((b, -w));
        rows[b].push((b, w));
        rows[b].push((a, -w));
    };
    for j in 0..n {
        for i in 0..nr - 1 {
            edge(grid.index(i, j), grid.index(i + 1, j), grid.face_weight(i) / (h * h));
        }
        for i in 0..nr {
            let len = r[i] * dt;
            edge(grid.index(i, j), grid.index(i, (j + 1) % n), grid.cell_weight(i) / (len * len));
        }
    }
    // chords of length h through the pole, each standing for area r_0² Δθ
    for j in 0..n / 2 {
        edge(grid.index(0, j), grid.index(0, grid.opposite(j)), r[0] * r[0] * dt / (h * h));
    }
    let mut b = CsrBuilder::new(grid.node_count());
    for mut row in rows {
        row.sort_by_key(|e| e.0);
        let mut k = 0;
        while k < row.len() {
            let col = row[k].0;
            let mut v = 0.0;
            while k < row.len() && row[k].0 == col {
                v += row[k].1;
                k += 1;
            }
            b.push(col, v);
        }
        b.finish_row();
    }
    b.build()
}

/// `B⁻¹` for `B = S + a aᵀ` by Woodbury around `S + β βᵀ` with a ring-constant `β`.
struct DenominatorInverse {
    regular: BlockCirculantSolver,
    columns: [Vec<f64>; 2],
    solved: [Vec<f64>; 2],
    capacitance: [[f64; 2]; 2],
}

impl DenominatorInverse {
    fn new(forms: &InequalityForms) -> Result<Self> {
        let grid = &forms.grid;
        let n = grid.n_theta();
        let area = std::f64::consts::PI * grid.radius().powi(2);
        let ring: Vec<f64> = (0..grid.n_r()).map(|i| grid.ring_weight(i) / area.sqrt()).collect();
        let regular = BlockCirculantSolver::new(&forms.dirichlet, grid.n_r(), n, Some(&ring))?;
        let beta: Vec<f64> = (0..grid.node_count()).map(|k| ring[k / n]).collect();
        // B = (S + ββᵀ) + U C Uᵀ with U = [a, β], C = diag(1, −1)
        let columns = [forms.anchor.clone(), beta];
        let solved = [regular.solve(&columns[0]), regular.solve(&columns[1])];
        let sign = [1.0, -1.0];
        let mut capacitance = [[0.0; 2]; 2];
        for a in 0..2 {
            for b in 0..2 {
                capacitance[a][b] = dot(&columns[a], &solved[b]) + if a == b { sign[a] } else { 0.0 };
            }
        }
        Ok(Self {
            regular,
            columns,
            solved,
            capacitance,
        })
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut y = self.regular.solve(rhs);
        let t = [dot(&self.columns[0], &y), dot(&self.columns[1], &y)];
        let c = self.capacitance;
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let z = [
            (c[1][1] * t[0] - c[0][1] * t[1]) / det,
            (c[0][0] * t[1] - c[1][0] * t[0]) / det,
        ];
        axpy(-z[0], &self.solved[0], &mut y);
        axpy(-z[1], &self.solved[1], &mut y);
        y
    }
}

/// Largest eigenvalue `θ` of `M u = θ B u` with a residual bound, by Lanczos in
/// the `B` inner product with full reorthogonalization.
fn top_eigenvalue(forms: &InequalityForms) -> Result<(f64, f64)> {
    let inverse = DenominatorInverse::new(forms)?;
    let dim = forms.mass.len();
    let apply_mass = |u: &[f64]| -> Vec<f64> { u.iter().zip(&forms.mass).map(|(v, m)| v * m).collect() };
    // deterministic start with every component present
    let golden = 0.5 * (5f64.sqrt() - 1.0);
    let mut q: Vec<f64> = (0..dim).map(|k| 1.0 + 0.5 * ((k as f64 * golden).fract() - 0.5)).collect();
    let mut bq = forms.denominator_apply(&q);
    let norm = dot(&q, &bq).sqrt();
    q.iter_mut().for_each(|v| *v /= norm);
    bq.iter_mut().for_each(|v| *v /= norm);

    let mut basis: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut alphas = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let max_steps = LANCZOS_MAX_STEPS.min(dim);
    let mut last = (0.0, f64::INFINITY);
    for step in 0..max_steps {
        let mq = apply_mass(&q);
        let alpha = dot(&mq, &q);
        let mut z = inverse.solve(&mq);
        basis.push((q, bq));
        for _ in 0..2 {
            for (qi, bqi) in &basis {
                let c = dot(&z, bqi);
                axpy(-c, qi, &mut z);
            }
        }
        alphas.push(alpha);
        let bz = forms.denominator_apply(&z);
        let beta = dot(&z, &bz).max(0.0).sqrt();

        let k = alphas.len();
        let t = DMatrix::from_fn(k, k, |a, b| {
            if a == b {
                alphas[a]
            } else if a + 1 == b {
                betas[a]
            } else if b + 1 == a {
                betas[b]
            } else {
                0.0
            }
        });
        let eig = SymmetricEigen::new(t);
        let (top, &theta) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty tridiagonal");
        let bound = beta * eig.eigenvectors[(k - 1, top)].abs();
        last = (theta, bound);
        if bound <= LANCZOS_TOL * theta || beta == 0.0 || step + 1 == dim {
            return Ok((theta, bound));
        }
        betas.push(beta);
        q = z.iter().map(|v| v / beta).collect();
        bq = bz.iter().map(|v| v / beta).collect();
    }
    Err(Error::EigenNonConvergence {
        iterations: max_steps,
        residual: last.1 / last.0,
    })
}

fn estimate(grid: &Arc<PolarGrid>, anchor: &RegionSpec, inequality: Inequality) -> Result<ConstantEstimate> {
    let forms = InequalityForms::new(grid, anchor, inequality)?;
    let (theta, bound) = top_eigenvalue(&forms)?;
    Ok(ConstantEstimate {
        inequality,
        radius: grid.radius(),
        anchor: anchor.clone(),
        // (a + b) ≥ √(a² + b²), so √θ_max bounds the ratio of every field
        value: (theta + bound).sqrt(),
        n_r: grid.n_r(),
        n_theta: grid.n_theta(),
    })
}

/// Constant `C` with `‖u‖ ≤ C (‖∇u‖ + |⨍_λ u|)` for every nodal field on the grid.
///
/// Computed as `√θ_max` for the pencil `‖u‖² = θ (‖∇u‖² + (⨍_λ u)²)`.
pub fn estimate_poincare_constant(grid: &Arc<PolarGrid>, anchor: &RegionSpec) -> Result<ConstantEstimate> {
    estimate(grid, anchor, Inequality::Poincare)
}

/// Constant `C` with `‖u 𝔴‖ ≤ C (‖∇u‖ + |⨍_λ u|)` for every nodal field on the grid.
pub fn estimate_hardy_constant(grid: &Arc<PolarGrid>, anchor: &RegionSpec) -> Result<ConstantEstimate> {
    estimate(grid, anchor, Inequality::Hardy)
}

/// All eigenvalues of the pencil by a dense solve, in decreasing order.
/// Intended for coarse grids (cost grows with the cube of the node count).
pub fn estimate_constant_dense(
    grid: &Arc<PolarGrid>,
    anchor: &RegionSpec,
    inequality: Inequality,
) -> Result<Vec<f64>> {
    let forms = InequalityForms::new(grid, anchor, inequality)?;
    let dim = forms.mass.len();
    let mut b = DMatrix::<f64>::zeros(dim, dim);
    for row in 0..dim {
        for (c, v) in forms.dirichlet.row(row) {
            b[(row, c)] += v;
        }
    }
    for r in 0..dim {
        for c in 0..dim {
            b[(r, c)] += forms.anchor[r] * forms.anchor[c];
        }
    }
    // symmetrize rounding in the mean functional before factoring
    let b = (&b + b.transpose()) * 0.5;
    let chol = b
        .cholesky()
        .ok_or_else(|| Error::Invariant("denominator form is not positive definite".into()))?;
    // M^{1/2} B⁻¹ M^{1/2}
    let sqrt_m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(dim, forms.mass.iter().map(|m| m.sqrt())));
    let inner = chol.solve(&sqrt_m);
    let sym = &sqrt_m * inner;
    let sym = (&sym + sym.transpose()) * 0.5;
    let mut values: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_polar_grid;

    #[test]
    fn dirichlet_kernel_is_constants() {
        let g = make_polar_grid(1.0, 8, 8).unwrap();
        let s = dirichlet_matrix(&g);
        let ones = vec![1.0; g.node_count()];
        assert!(s.mul_vec(&ones).iter().all(|v| v.abs() < 1e-9));
        let checker: Vec<f64> = (0..g.node_count()).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(s.quad_form(&checker) > 1.0);
    }

    #[test]
    fn dirichlet_energy_of_linear_field() {
        let g = make_polar_grid(1.0, 64, 128).unwrap();
        let u: Vec<f64> = (0..g.node_count()).map(|k| g.position(k)[0]).collect();
        let e = dirichlet_matrix(&g).quad_form(&u);
        assert!((e - std::f64::consts::PI).abs() < 2e-3, "{e}");
    }

    #[test]
    fn lanczos_matches_dense_oracle() {
        let g = make_polar_grid(1.0, 16, 32).unwrap();
        for (anchor, ineq) in [
            (RegionSpec::centered_disk(1.0), Inequality::Poincare),
            (RegionSpec::disk([0.3, 0.2], 0.25), Inequality::Poincare),
            (RegionSpec::centered_disk(0.5), Inequality::Hardy),
        ] {
            let est = estimate(&g, &anchor, ineq).unwrap();
            let dense = estimate_constant_dense(&g, &anchor, ineq).unwrap();
            let oracle = dense[0].sqrt();
            assert!((est.value - oracle).abs() < 1e-6 * oracle, "{} vs {oracle}", est.value);
        }
    }

    #[test]
    fn full_disk_poincare_is_root_pi() {
        let g = make_polar_grid(1.0, 16, 32).unwrap();
        let dense = estimate_constant_dense(&g, &RegionSpec::centered_disk(1.0), Inequality::Poincare).unwrap();
        let pi = std::f64::consts::PI;
        assert!((dense[0] - pi).abs() < 1e-3 * pi, "{}", dense[0]);
        // the next branch is the zero-mean one, 1/λ₁ with λ₁ = j′₁₁² for the unit disk
        let lambda1 = 1.841_183_781_340_659_3f64.powi(2);
        assert!((dense[1] - 1.0 / lambda1).abs() < 0.03 / lambda1, "{}", dense[1]);
    }
}
