//! Browser demo: a small disk solve, the log-log cutoff profiles, and the
//! zero-mean gate on catalog vector sources.
//!
//! Each operation has a plain Rust form returning a serializable report and a
//! `wasm_bindgen` export returning the same report as a JSON string.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use planar_leray::geometry::{make_polar_grid, RegionSpec};
use planar_leray::solver::{solve_disk, SolveConfig};
use planar_leray::sources::{
    build_tensor_source, build_vector_source, lift_vector_source, source_integrals, SourceKind,
    SourceSpec, ZERO_MEAN_TOLERANCE,
};
use planar_leray::weighted::{CutoffFamily, CutoffKind};
use planar_leray::Error;

/// Largest grid the demo accepts, to keep a page responsive.
pub const MAX_NODES: usize = 64 * 128;

/// Velocity on a coarse sample of the grid plus the solve diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct SolveView {
    pub radius: f64,
    pub grad_norm: f64,
    pub forcing_norm: f64,
    pub energy_gap: f64,
    pub c: [f64; 2],
    pub picard_iterations: usize,
    /// `[x, y, u_x, u_y]` on about 16 rings and 32 angles.
    pub samples: Vec<[f64; 4]>,
}

/// Solves with a swirling tensor bump of the given amplitude centered at the origin.
pub fn swirl_solve(radius: f64, n_r: usize, n_theta: usize, amplitude: f64, mu: [f64; 2]) -> Result<SolveView, Error> {
    if n_r * n_theta > MAX_NODES {
        return Err(Error::InvalidConfig(format!("grid larger than {MAX_NODES} nodes")));
    }
    let grid = make_polar_grid(radius, n_r, n_theta)?;
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-swirl", [0.0, 0.0], 0.5 * radius, amplitude);
    let forcing = build_tensor_source(&spec, &grid)?.field;
    let config = SolveConfig::new(mu, RegionSpec::centered_disk(0.25 * radius));
    let sol = solve_disk(&grid, &forcing, &config)?;
    let mut samples = Vec::new();
    for i in (0..n_r).step_by(n_r.div_ceil(16)) {
        for j in (0..n_theta).step_by(n_theta.div_ceil(32)) {
            let k = grid.index(i, j);
            let [x, y] = grid.position(k);
            let [ux, uy] = sol.u.values()[k];
            samples.push([x, y, ux, uy]);
        }
    }
    Ok(SolveView {
        radius,
        grad_norm: sol.grad_norm,
        forcing_norm: sol.forcing_norm,
        energy_gap: sol.checks.energy_gap,
        c: sol.c,
        picard_iterations: sol.iterations.len(),
        samples,
    })
}

/// A cutoff and its gradient bound along the positive x-axis.
#[derive(Debug, Clone, Serialize)]
pub struct CutoffView {
    pub kind: &'static str,
    pub n: f64,
    pub plateau_radius: f64,
    pub r: Vec<f64>,
    pub value: Vec<f64>,
    pub gradient: Vec<f64>,
    pub gradient_bound: Vec<f64>,
}

pub fn cutoff_view(kind: &str, n: f64, points: usize) -> Result<CutoffView, Error> {
    let kind = match kind {
        "psi" => CutoffKind::Psi,
        "eta" => CutoffKind::Eta,
        other => return Err(Error::InvalidConfig(format!("unknown cutoff kind `{other}`"))),
    };
    let points = points.clamp(2, 4096);
    let family = CutoffFamily::new(kind, n)?;
    let mut view = CutoffView {
        kind: kind.name(),
        n,
        plateau_radius: family.plateau_radius(),
        r: Vec::with_capacity(points),
        value: Vec::with_capacity(points),
        gradient: Vec::with_capacity(points),
        gradient_bound: Vec::with_capacity(points),
    };
    for k in 0..points {
        let r = n * k as f64 / (points - 1) as f64;
        let s = family.eval([r, 0.0]);
        view.r.push(r);
        view.value.push(s.value);
        view.gradient.push(s.grad[0].hypot(s.grad[1]));
        view.gradient_bound.push(family.gradient_bound([r, 0.0]));
    }
    Ok(view)
}

/// Outcome of passing a catalog vector source through the zero-mean gate.
#[derive(Debug, Clone, Serialize)]
pub struct GateView {
    pub shape: String,
    pub integrals: [f64; 2],
    pub l1_norm: f64,
    pub tolerance: f64,
    pub accepted: bool,
    pub message: String,
}

pub fn gate_view(shape: &str, center: [f64; 2], support_radius: f64) -> Result<GateView, Error> {
    let grid = make_polar_grid(1.5, 64, 128)?;
    let spec = SourceSpec::new(SourceKind::VectorCompact, shape, center, support_radius, 1.0);
    let f = build_vector_source(&spec, &grid)?;
    let (integrals, l1_norm) = source_integrals(&f);
    let (accepted, message) = match lift_vector_source(&f, &grid, &RegionSpec::centered_disk(0.3)) {
        Ok(_) => (true, "lifted to a tensor forcing".to_string()),
        Err(e @ Error::ZeroMeanGate { .. }) => (false, e.to_string()),
        Err(e) => return Err(e),
    };
    Ok(GateView {
        shape: shape.to_string(),
        integrals,
        l1_norm,
        tolerance: ZERO_MEAN_TOLERANCE * l1_norm,
        accepted,
        message,
    })
}

fn to_js<T: Serialize>(r: Result<T, Error>) -> Result<String, JsValue> {
    let value = r.map_err(|e| JsValue::from_str(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen(js_name = solveSwirl)]
pub fn solve_swirl(radius: f64, n_r: usize, n_theta: usize, amplitude: f64, mu_x: f64, mu_y: f64) -> Result<String, JsValue> {
    to_js(swirl_solve(radius, n_r, n_theta, amplitude, [mu_x, mu_y]))
}

#[wasm_bindgen(js_name = cutoffProfile)]
pub fn cutoff_profile(kind: &str, n: f64, points: usize) -> Result<String, JsValue> {
    to_js(cutoff_view(kind, n, points))
}

#[wasm_bindgen(js_name = zeroMeanGate)]
pub fn zero_mean_gate(shape: &str, center_x: f64, center_y: f64, support_radius: f64) -> Result<String, JsValue> {
    to_js(gate_view(shape, [center_x, center_y], support_radius))
}
