//! Invading disks: solve the anchored problem on a growing radius ladder,
//! extend each solution by its boundary constant, and monitor the distances
//! between consecutive solutions on a fixed compact set.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_polar_grid, Field, PolarGrid, MIN_ANGULAR_NODES, MIN_RADIAL_NODES};
use crate::solver::{solve_disk, DiskSolution, SolveConfig};
use crate::sources::{build_forcing, SourceSpec};
use crate::weighted::weight_radial;

/// Norms for comparing two disk solutions on a compact set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompactNorm {
    /// `‖a − b‖_{L⁴(B_m)}` with the Euclidean norm of the difference.
    L4,
    /// `‖(a − b) 𝔴‖_{L²(B_m)}`.
    WeightedL2,
}

/// A distance with the estimated error introduced by resampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Distance {
    pub value: f64,
    /// Change in `value` when the target grid is coarsened by two.
    pub interpolation_error: f64,
}

/// Value of the extended solution: interpolated inside the disk, `μ + c` outside.
pub fn extended_value(sol: &DiskSolution, x: [f64; 2]) -> [f64; 2] {
    match sol.grid.interpolation_stencil(x) {
        Some(st) => [sol.u.interpolate(&st, 0), sol.u.interpolate(&st, 1)],
        None => sol.far_value(),
    }
}

fn target_grid(a: &PolarGrid, b: &PolarGrid, m: f64, coarsen: usize) -> Result<Arc<PolarGrid>> {
    let h = a.h().min(b.h()) * coarsen as f64;
    let n_r = ((m / h + 0.5).ceil() as usize).max(MIN_RADIAL_NODES);
    let mut n_theta = a.n_theta().max(b.n_theta()) / coarsen;
    n_theta = (n_theta + n_theta % 2).max(MIN_ANGULAR_NODES);
    make_polar_grid(m, n_r, n_theta)
}

fn distance_on(a: &DiskSolution, b: &DiskSolution, grid: &PolarGrid, norm: CompactNorm) -> f64 {
    let w = grid.quadrature_weights();
    let total: f64 = (0..grid.node_count())
        .map(|k| {
            let x = grid.position(k);
            let (ua, ub) = (extended_value(a, x), extended_value(b, x));
            let d2 = (ua[0] - ub[0]).powi(2) + (ua[1] - ub[1]).powi(2);
            w[k] * match norm {
                CompactNorm::L4 => d2 * d2,
                CompactNorm::WeightedL2 => d2 * weight_radial(x[0].hypot(x[1])).powi(2),
            }
        })
        .sum();
    match norm {
        CompactNorm::L4 => total.max(0.0).powf(0.25),
        CompactNorm::WeightedL2 => total.max(0.0).sqrt(),
    }
}

/// Distance between two extended solutions on `B_m`, after resampling both
/// onto a polar grid of radius `m` as fine as the finer input.
pub fn compact_distance(a: &DiskSolution, b: &DiskSolution, m: f64, norm: CompactNorm) -> Result<Distance> {
    let limit = a.grid.radius().min(b.grid.radius());
    if !(m > 0.0) || m > limit {
        return Err(Error::MonitorTooLarge { monitor: m, radius: limit });
    }
    let fine = target_grid(&a.grid, &b.grid, m, 1)?;
    let coarse = target_grid(&a.grid, &b.grid, m, 2)?;
    let value = distance_on(a, b, &fine, norm);
    let interpolation_error = (value - distance_on(a, b, &coarse, norm)).abs();
    Ok(Distance {
        value,
        interpolation_error,
    })
}

/// Grid resolution used at every radius of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderResolution {
    /// Radial nodes per unit length; the ring count grows with the radius.
    pub rings_per_unit: f64,
    /// Angular nodes, kept fixed so resolution near the source does not change.
    pub n_theta: usize,
}

impl LadderResolution {
    pub fn grid(&self, radius: f64) -> Result<Arc<PolarGrid>> {
        let n_r = ((self.rings_per_unit * radius).round() as usize).max(MIN_RADIAL_NODES);
        make_polar_grid(radius, n_r, self.n_theta)
    }
}

/// Per-radius outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiusRecord {
    pub radius: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub converged: bool,
    pub error: Option<String>,
    pub c: Option<[f64; 2]>,
    pub grad_norm: Option<f64>,
    pub energy_pairing: Option<f64>,
    pub anchored_mean: Option<[f64; 2]>,
    pub forcing_norm: Option<f64>,
    pub picard_iterations: Option<usize>,
}

/// Distances between the solutions at `radii[from]` and `radii[to]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairDistance {
    pub from: usize,
    pub to: usize,
    /// `‖u_to − u_from‖_{L⁴(B_m)}`.
    pub l4: Distance,
    /// `‖(u_to − u_from) 𝔴‖_{L²(B_{n_from})}`.
    pub weighted_l2: Distance,
}

/// Structured result of [`run_invading`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvadingReport {
    pub radii: Vec<f64>,
    pub monitor_radius: f64,
    pub resolution: LadderResolution,
    pub records: Vec<RadiusRecord>,
    /// Every pair of converged radii, `from < to`.
    pub distances: Vec<PairDistance>,
    /// All radii converged.
    pub complete: bool,
    /// Consecutive L⁴ distances strictly decrease along the ladder.
    pub distances_decreasing: bool,
    /// `‖∇u_n‖ ≤ ‖F‖ (1 + 1e-8)` at every converged radius.
    pub uniform_bound_holds: bool,
    /// Largest `|⨍_ω u_n − μ|` over converged radii.
    pub max_mean_error: f64,
    /// Solution on the largest converged disk.
    #[serde(skip)]
    pub final_solution: Option<DiskSolution>,
}

impl InvadingReport {
    /// L⁴ distance between consecutive converged radii ending at `index`.
    pub fn distance_to_previous(&self, index: usize) -> Option<f64> {
        self.distances
            .iter()
            .find(|d| d.to == index && d.from + 1 == index)
            .map(|d| d.l4.value)
    }

    /// Rows `radius,grad_norm,c_x,c_y,distance_to_previous`.
    pub fn convergence_csv(&self) -> String {
        let mut out = String::from("radius,grad_norm,c_x,c_y,distance_to_previous\n");
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for (i, rec) in self.records.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:.16e},{},{},{},{}",
                rec.radius,
                fmt(rec.grad_norm),
                fmt(rec.c.map(|c| c[0])),
                fmt(rec.c.map(|c| c[1])),
                fmt(self.distance_to_previous(i)),
            );
        }
        out
    }
}

fn check_ladder(radii: &[f64], spec: &SourceSpec, config: &SolveConfig, monitor: f64) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::InvalidConfig("radius ladder is empty".into()));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) || radii.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::InvalidConfig("radii must be positive and strictly increasing".into()));
    }
    if !(monitor > 0.0 && monitor < radii[0]) {
        return Err(Error::MonitorTooLarge {
            monitor,
            radius: radii[0],
        });
    }
    if spec.extent() > monitor {
        return Err(Error::InvalidConfig(format!(
            "source support reaches {} beyond the monitor radius {monitor}",
            spec.extent()
        )));
    }
    if config.omega.max_extent() > monitor {
        return Err(Error::InvalidConfig(format!(
            "anchor region {} is not inside the monitor disk",
            config.omega.describe()
        )));
    }
    Ok(())
}

/// Solves on every radius of the ladder (concurrently, on the current rayon
/// pool) with shared `μ`, `ω` and source, then compares the extended solutions.
///
/// A failed radius is recorded and the report flagged incomplete; only
/// configuration errors abort.
pub fn run_invading(
    radii: &[f64],
    source: &SourceSpec,
    config: &SolveConfig,
    monitor_radius: f64,
    resolution: LadderResolution,
) -> Result<InvadingReport> {
    check_ladder(radii, source, config, monitor_radius)?;
    config.validate()?;
    let outcomes: Vec<(Arc<PolarGrid>, Result<DiskSolution>)> = radii
        .par_iter()
        .map(|&r| {
            let grid = resolution.grid(r)?;
            let sol = build_forcing(source, &grid, &config.omega).and_then(|f| solve_disk(&grid, &f, config));
            Ok((grid, sol))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut records = Vec::with_capacity(radii.len());
    let mut solutions: Vec<Option<DiskSolution>> = Vec::with_capacity(radii.len());
    for (&radius, (grid, outcome)) in radii.iter().zip(outcomes) {
        let mut rec = RadiusRecord {
            radius,
            n_r: grid.n_r(),
            n_theta: grid.n_theta(),
            converged: false,
            error: None,
            c: None,
            grad_norm: None,
            energy_pairing: None,
            anchored_mean: None,
            forcing_norm: None,
            picard_iterations: None,
        };
        match outcome {
            Ok(sol) => {
                rec.converged = true;
                rec.c = Some(sol.c);
                rec.grad_norm = Some(sol.grad_norm);
                rec.energy_pairing = Some(sol.energy_pairing);
                rec.anchored_mean = Some(sol.anchored_mean);
                rec.forcing_norm = Some(sol.forcing_norm);
                rec.picard_iterations = Some(sol.iterations.len());
                solutions.push(Some(sol));
            }
            Err(e) => {
                log::warn!("radius {radius}: {e}");
                rec.error = Some(e.to_string());
                solutions.push(None);
            }
        }
        records.push(rec);
    }

    let pairs: Vec<(usize, usize)> = (0..radii.len())
        .flat_map(|i| (i + 1..radii.len()).map(move |j| (i, j)))
        .filter(|&(i, j)| solutions[i].is_some() && solutions[j].is_some())
        .collect();
    let distances = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (solutions[i].as_ref().unwrap(), solutions[j].as_ref().unwrap());
            Ok(PairDistance {
                from: i,
                to: j,
                l4: compact_distance(a, b, monitor_radius, CompactNorm::L4)?,
                weighted_l2: compact_distance(a, b, radii[i], CompactNorm::WeightedL2)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let complete = solutions.iter().all(Option::is_some);
    let consecutive: Vec<f64> = distances
        .iter()
        .filter(|d| d.to == d.from + 1)
        .map(|d| d.l4.value)
        .collect();
    let distances_decreasing = complete && consecutive.windows(2).all(|w| w[1] < w[0]);
    let converged: Vec<&DiskSolution> = solutions.iter().flatten().collect();
    let uniform_bound_holds = converged
        .iter()
        .all(|s| s.grad_norm <= s.forcing_norm * (1.0 + 1e-8));
    let max_mean_error = converged.iter().map(|s| s.checks.mean_error).fold(0.0, f64::max);
    if complete && !distances_decreasing && consecutive.len() > 1 {
        log::warn!("consecutive distances are not decreasing: {consecutive:?}");
    }
    let final_solution = solutions.into_iter().rev().flatten().next();
    Ok(InvadingReport {
        radii: radii.to_vec(),
        monitor_radius,
        resolution,
        records,
        distances,
        complete,
        distances_decreasing,
        uniform_bound_holds,
        max_mean_error,
        final_solution,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RegionSpec, TensorField, VectorField};
    use crate::sources::SourceKind;

    fn constant_solution(radius: f64, c: [f64; 2]) -> DiskSolution {
        let grid = make_polar_grid(radius, 16, 32).unwrap();
        let f = TensorField::zeros(&grid);
        let mut sol = solve_disk(&grid, &f, &SolveConfig::new([0.0, 0.0], RegionSpec::centered_disk(0.5))).unwrap();
        sol.c = c;
        sol.u = VectorField::constant(&grid, c);
        sol
    }

    #[test]
    fn distance_of_constants_is_closed_form() {
        let a = constant_solution(3.0, [1.0, 0.5]);
        let b = constant_solution(4.0, [-0.5, 2.0]);
        let m = 2.0;
        let d = compact_distance(&a, &b, m, CompactNorm::L4).unwrap();
        let expected = (1.5f64.hypot(1.5)) * (std::f64::consts::PI * m * m).powf(0.25);
        assert!((d.value - expected).abs() < 1e-10 * expected);
        assert!(d.interpolation_error < 1e-10);
        assert_eq!(compact_distance(&a, &a, m, CompactNorm::WeightedL2).unwrap().value, 0.0);
    }

    #[test]
    fn monitor_must_fit() {
        let a = constant_solution(3.0, [0.0, 0.0]);
        assert!(matches!(
            compact_distance(&a, &a, 3.5, CompactNorm::L4),
            Err(Error::MonitorTooLarge { .. })
        ));
    }

    #[test]
    fn zero_forcing_ladder_is_trivial() {
        let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.0, 0.0], 0.5, 0.0);
        let config = SolveConfig::new([1.0, -0.5], RegionSpec::centered_disk(0.5));
        let res = LadderResolution {
            rings_per_unit: 3.0,
            n_theta: 16,
        };
        let report = run_invading(&[4.0, 8.0, 16.0], &spec, &config, 2.0, res).unwrap();
        assert!(report.complete);
        for rec in &report.records {
            assert_eq!(rec.c, Some([0.0, 0.0]));
            assert_eq!(rec.grad_norm, Some(0.0));
        }
        assert!(report.distances.iter().all(|d| d.l4.value < 1e-12 && d.weighted_l2.value < 1e-12));
        assert_eq!(report.distances.len(), 3);
    }

    #[test]
    fn ladder_validation() {
        let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.0, 0.0], 0.5, 1.0);
        let config = SolveConfig::new([0.0, 0.0], RegionSpec::centered_disk(0.5));
        let res = LadderResolution {
            rings_per_unit: 2.0,
            n_theta: 16,
        };
        assert!(run_invading(&[4.0, 2.0], &spec, &config, 1.0, res).is_err());
        assert!(matches!(
            run_invading(&[4.0, 8.0], &spec, &config, 5.0, res),
            Err(Error::MonitorTooLarge { .. })
        ));
        let wide = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.0, 0.0], 1.5, 1.0);
        assert!(run_invading(&[4.0, 8.0], &wide, &config, 1.0, res).is_err());
    }
}
