use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::space::StreamSpace;
use crate::error::{Error, Result};
use crate::geometry::{apply_mean, check_same_grid, Field, PolarGrid, RegionSpec, TensorField, VectorField};
use crate::linalg::{gmres, KrylovStats};
use crate::sparse::{axpy, dot};

const GMRES_RESTART: usize = 60;
const GMRES_MAX_ITER: usize = 1200;

fn default_steps() -> usize {
    4
}
fn default_picard_tol() -> f64 {
    1e-10
}
fn default_picard_max_iter() -> usize {
    50
}
fn default_linear_tol() -> f64 {
    1e-11
}
fn default_damping() -> f64 {
    1.0
}

/// Parameters of one disk solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Prescribed mean of `u` over `omega`.
    pub mu: [f64; 2],
    pub omega: RegionSpec,
    #[serde(default = "default_steps")]
    pub homotopy_steps: usize,
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_picard_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_linear_tol")]
    pub linear_tol: f64,
    #[serde(default = "default_damping")]
    pub damping: f64,
}

impl SolveConfig {
    pub fn new(mu: [f64; 2], omega: RegionSpec) -> Self {
        Self {
            mu,
            omega,
            homotopy_steps: default_steps(),
            picard_tol: default_picard_tol(),
            picard_max_iter: default_picard_max_iter(),
            linear_tol: default_linear_tol(),
            damping: default_damping(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !self.mu.iter().all(|m| m.is_finite()) {
            return bad("mu must be finite".into());
        }
        if self.homotopy_steps == 0 {
            return bad("homotopy_steps must be at least 1".into());
        }
        if !(self.picard_tol > 0.0 && self.linear_tol > 0.0) {
            return bad("tolerances must be positive".into());
        }
        if self.picard_max_iter == 0 {
            return bad("picard_max_iter must be at least 1".into());
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad(format!("damping must lie in (0, 1], got {}", self.damping));
        }
        self.omega.validate()
    }
}

/// One accepted Picard iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterateRecord {
    pub lambda: f64,
    pub iteration: usize,
    /// Dual norm of the weak-form residual at this rung.
    pub residual: f64,
    pub grad_v_norm: f64,
}

/// Post-solve invariant measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionChecks {
    /// `‖∇u‖² − ⟨F, ∇u⟩`.
    pub energy_gap: f64,
    /// `|⨍_ω u − μ|`.
    pub mean_error: f64,
    /// `max |u − (μ + c)|` on the boundary ring.
    pub boundary_error: f64,
    /// Largest `‖∇v‖ / ‖F‖` over the trace (0 for zero forcing).
    pub apriori_ratio: f64,
    /// Weak-form residual of the returned state at `λ = 1`.
    pub final_residual: f64,
}

/// Converged state of the anchored problem on one disk.
#[derive(Debug, Clone)]
pub struct DiskSolution {
    pub grid: Arc<PolarGrid>,
    pub u: VectorField,
    pub v: VectorField,
    /// Stream function of `v` on the unknown rings.
    pub stream: Vec<f64>,
    pub c: [f64; 2],
    pub mu: [f64; 2],
    pub omega: RegionSpec,
    pub anchored_mean: [f64; 2],
    pub grad_norm: f64,
    pub energy_pairing: f64,
    /// Discrete `‖F‖` dual to the energy norm.
    pub forcing_norm: f64,
    pub picard_tol: f64,
    pub iterations: Vec<IterateRecord>,
    pub checks: SolutionChecks,
}

/// JSON summary of a [`DiskSolution`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiskSummary {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub mu: [f64; 2],
    pub c: [f64; 2],
    pub anchored_mean: [f64; 2],
    pub grad_norm: f64,
    pub energy_pairing: f64,
    pub forcing_norm: f64,
    pub checks: SolutionChecks,
    pub iterations: Vec<IterateRecord>,
}

impl DiskSolution {
    pub fn summary(&self) -> DiskSummary {
        DiskSummary {
            radius: self.grid.radius(),
            n_r: self.grid.n_r(),
            n_theta: self.grid.n_theta(),
            mu: self.mu,
            c: self.c,
            anchored_mean: self.anchored_mean,
            grad_norm: self.grad_norm,
            energy_pairing: self.energy_pairing,
            forcing_norm: self.forcing_norm,
            checks: self.checks,
            iterations: self.iterations.clone(),
        }
    }

    /// Boundary value `μ + c`, the constant extension outside the disk.
    pub fn far_value(&self) -> [f64; 2] {
        [self.mu[0] + self.c[0], self.mu[1] + self.c[1]]
    }

    pub fn velocity(&self) -> DiscreteVelocity {
        DiscreteVelocity {
            constant: self.far_value(),
            stream: self.stream.clone(),
        }
    }
}

/// A velocity of the discrete space: a constant plus `∇⊥φ` of a clamped stream.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVelocity {
    pub constant: [f64; 2],
    pub stream: Vec<f64>,
}

impl DiscreteVelocity {
    pub fn nodal(&self, space: &StreamSpace) -> VectorField {
        space.velocity(&self.stream).add_constant(self.constant)
    }
}

/// The linear system `(A + λ N(b)) φ = λ r_F` at one Picard step.
pub struct LinearizedSystem<'a> {
    space: &'a StreamSpace,
    wind: VectorField,
    lambda: f64,
    rhs: Vec<f64>,
}

impl<'a> LinearizedSystem<'a> {
    /// `forcing` is the unscaled load vector `r_F`; `wind` the full advecting field.
    pub fn new(space: &'a StreamSpace, forcing: &[f64], wind: VectorField, lambda: f64) -> Self {
        let rhs = forcing.iter().map(|v| lambda * v).collect();
        Self {
            space,
            wind,
            lambda,
            rhs,
        }
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    pub fn wind(&self) -> &VectorField {
        &self.wind
    }

    /// Convection block `N(b) φ` (unscaled by λ).
    pub fn convection(&self, phi: &[f64]) -> Vec<f64> {
        self.space.convection_apply(&self.wind, phi)
    }

    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut y = self.space.stokes_apply(phi);
        if self.lambda != 0.0 {
            axpy(self.lambda, &self.convection(phi), &mut y);
        }
        y
    }

    /// Krylov solve from `initial` on `(I + λ A⁻¹ N) φ = λ A⁻¹ r_F` in the energy
    /// inner product, so `tol` bounds the dual norm of the residual relative to
    /// that of the load.
    pub fn solve(&self, initial: &[f64], tol: f64) -> Result<(Vec<f64>, KrylovStats)> {
        let mut x = initial.to_vec();
        let b = self.space.stokes_solve(&self.rhs);
        let stats = gmres(
            |v| self.preconditioned(v),
            |v| self.space.stokes_apply(v),
            &b,
            &mut x,
            tol,
            GMRES_RESTART,
            GMRES_MAX_ITER,
        );
        if !stats.converged {
            return Err(Error::LinearSolver {
                residual: stats.relative_residual,
                iterations: stats.iterations,
            });
        }
        Ok((x, stats))
    }

    /// `φ + λ A⁻¹ N φ`.
    fn preconditioned(&self, phi: &[f64]) -> Vec<f64> {
        let mut y = phi.to_vec();
        if self.lambda != 0.0 {
            axpy(self.lambda, &self.space.stokes_solve(&self.convection(phi)), &mut y);
        }
        y
    }

    /// Dual norm of `(A + λN) φ − λ r_F`, evaluated as `‖φ + λA⁻¹Nφ − λA⁻¹r_F‖_A`.
    pub fn residual_norm(&self, phi: &[f64]) -> f64 {
        let mut e = self.preconditioned(phi);
        axpy(-1.0, &self.space.stokes_solve(&self.rhs), &mut e);
        self.space.energy_norm(&e)
    }
}

/// Assembles the linearized system around `advecting` (a velocity with zero
/// boundary trace); the wind is `μ + advecting − ⨍_ω advecting`.
pub fn assemble_linearized<'a>(
    space: &'a StreamSpace,
    forcing: &TensorField,
    advecting: &VectorField,
    mu: [f64; 2],
    omega: &RegionSpec,
    lambda: f64,
) -> Result<LinearizedSystem<'a>> {
    check_same_grid(space.grid(), advecting.grid())?;
    check_same_grid(space.grid(), forcing.grid())?;
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidConfig(format!("lambda must lie in [0, 1], got {lambda}")));
    }
    let a = omega.mean_functional(space.grid())?;
    let mean = apply_mean(&a, advecting);
    let wind = advecting.add_constant([mu[0] - mean[0], mu[1] - mean[1]]);
    let (rhs, _) = space.forcing(forcing);
    Ok(LinearizedSystem::new(space, &rhs, wind, lambda))
}

struct Problem<'a> {
    space: &'a StreamSpace,
    anchor: Vec<f64>,
    mu: [f64; 2],
    rhs: Vec<f64>,
}

impl Problem<'_> {
    fn wind(&self, phi: &[f64]) -> VectorField {
        let v = self.space.velocity(phi);
        let mean = apply_mean(&self.anchor, &v);
        v.add_constant([self.mu[0] - mean[0], self.mu[1] - mean[1]])
    }

    /// Dual norm of `A φ + λ N(b(φ)) φ − λ r_F`.
    fn residual(&self, phi: &[f64], lambda: f64) -> f64 {
        LinearizedSystem::new(self.space, &self.rhs, self.wind(phi), lambda).residual_norm(phi)
    }
}

/// Solves the anchored problem on the grid disk by λ-continuation and damped Picard.
pub fn solve_disk(grid: &Arc<PolarGrid>, forcing: &TensorField, config: &SolveConfig) -> Result<DiskSolution> {
    let space = StreamSpace::new(grid)?;
    solve_in_space(&space, forcing, config, None)
}

/// As [`solve_disk`] with a prebuilt space and an optional warm start for `φ`.
pub fn solve_in_space(
    space: &StreamSpace,
    forcing: &TensorField,
    config: &SolveConfig,
    initial: Option<&[f64]>,
) -> Result<DiskSolution> {
    config.validate()?;
    let grid = space.grid();
    check_same_grid(grid, forcing.grid())?;
    if !forcing.is_finite() {
        return Err(Error::InvalidConfig("forcing contains non-finite samples".into()));
    }
    let anchor = config.omega.mean_functional(grid)?;
    let (rhs, forcing_norm) = space.forcing(forcing);
    let problem = Problem {
        space,
        anchor,
        mu: config.mu,
        rhs,
    };
    let scale = forcing_norm.max(1.0);
    let target = config.picard_tol * scale;
    let mut phi = initial.map_or_else(|| vec![0.0; space.dim()], |p| p.to_vec());
    let mut trace = Vec::new();
    let d = config.damping;

    for k in 1..=config.homotopy_steps {
        let lambda = k as f64 / config.homotopy_steps as f64;
        let mut residual = problem.residual(&phi, lambda);
        let mut it = 0;
        while residual > target {
            if it == config.picard_max_iter {
                return Err(Error::PicardNonConvergence {
                    lambda,
                    residual,
                    iterations: it,
                });
            }
            let system = LinearizedSystem::new(space, &problem.rhs, problem.wind(&phi), lambda);
            let (next, _) = system.solve(&phi, config.linear_tol)?;
            for (p, n) in phi.iter_mut().zip(&next) {
                *p = (1.0 - d) * *p + d * n;
            }
            it += 1;
            residual = problem.residual(&phi, lambda);
            trace.push(IterateRecord {
                lambda,
                iteration: it,
                residual,
                grad_v_norm: space.energy_norm(&phi),
            });
            log::debug!("lambda {lambda:.3} iterate {it}: residual {residual:.3e}");
        }
    }

    // one undamped solve with the converged wind makes the energy identity exact
    let system = LinearizedSystem::new(space, &problem.rhs, problem.wind(&phi), 1.0);
    let (phi, _) = system.solve(&phi, config.linear_tol)?;
    let final_residual = problem.residual(&phi, 1.0);
    trace.push(IterateRecord {
        lambda: 1.0,
        iteration: trace.iter().filter(|r| r.lambda == 1.0).count() + 1,
        residual: final_residual,
        grad_v_norm: space.energy_norm(&phi),
    });

    let v = space.velocity(&phi);
    let vbar = apply_mean(&problem.anchor, &v);
    let c = [-vbar[0], -vbar[1]];
    let u = v.add_constant([config.mu[0] + c[0], config.mu[1] + c[1]]);
    let anchored_mean = apply_mean(&problem.anchor, &u);
    let grad_norm = space.energy_norm(&phi);
    let energy_pairing = dot(&problem.rhs, &phi);

    let far = [config.mu[0] + c[0], config.mu[1] + c[1]];
    let last = grid.n_r() - 1;
    let boundary_error = (0..grid.n_theta())
        .map(|j| {
            let val = u.values()[grid.index(last, j)];
            (val[0] - far[0]).hypot(val[1] - far[1])
        })
        .fold(0.0, f64::max);
    let apriori_ratio = if forcing_norm > 0.0 {
        trace.iter().map(|r| r.grad_v_norm / forcing_norm).fold(0.0, f64::max)
    } else {
        0.0
    };
    let checks = SolutionChecks {
        energy_gap: grad_norm * grad_norm - energy_pairing,
        mean_error: (anchored_mean[0] - config.mu[0]).hypot(anchored_mean[1] - config.mu[1]),
        boundary_error,
        apriori_ratio,
        final_residual,
    };
    Ok(DiskSolution {
        grid: grid.clone(),
        u,
        v,
        stream: phi,
        c,
        mu: config.mu,
        omega: config.omega.clone(),
        anchored_mean,
        grad_norm,
        energy_pairing,
        forcing_norm,
        picard_tol: config.picard_tol,
        iterations: trace,
        checks,
    })
}

/// Load vector and discrete `‖F‖` for a forcing on this space.
pub fn forcing_load(space: &StreamSpace, forcing: &TensorField) -> (Vec<f64>, f64) {
    space.forcing(forcing)
}

/// `max_χ |⟨∇u, ∇φ⟩ + ⟨u·∇u, φ⟩ − ⟨F, ∇φ⟩| / ‖∇φ‖` over test velocities `φ = ∇⊥χ`.
///
/// All pairings use the solver's discrete forms with skew-symmetrized convection.
pub fn weak_residual(
    space: &StreamSpace,
    u: &DiscreteVelocity,
    forcing: &TensorField,
    battery: &[Vec<f64>],
) -> Result<f64> {
    check_same_grid(space.grid(), forcing.grid())?;
    let (rhs, _) = space.forcing(forcing);
    let wind = u.nodal(space);
    let system = LinearizedSystem::new(space, &rhs, wind, 1.0);
    let mut r = system.apply(&u.stream);
    axpy(-1.0, system.rhs(), &mut r);
    let mut worst: f64 = 0.0;
    for chi in battery {
        let norm = space.energy_norm(chi);
        if norm > 0.0 {
            worst = worst.max(dot(&r, chi).abs() / norm);
        }
    }
    Ok(worst)
}

/// Deterministic battery of clamped stream bumps well inside the disk.
pub fn test_battery(space: &StreamSpace, count: usize) -> Vec<Vec<f64>> {
    let radius = space.grid().radius();
    (0..count)
        .map(|k| {
            let (a, b, c) = (halton(k + 1, 2), halton(k + 1, 3), halton(k + 1, 5));
            let rho = radius * (0.15 + 0.25 * c);
            let reach = (0.85 * radius - rho).max(0.0) * a.sqrt();
            let t = 2.0 * std::f64::consts::PI * b;
            let center = [reach * t.cos(), reach * t.sin()];
            let bump = crate::sources::Bump::new(center, rho);
            space.sample_stream(|x, y| bump.value(x, y))
        })
        .collect()
}

pub(crate) fn halton(mut index: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while index > 0 {
        f /= base as f64;
        r += f * (index % base) as f64;
        index /= base;
    }
    r
}
