use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::grid::{PolarGrid, Stencil};
use crate::error::{Error, Result};

/// A bounded set of positive measure used as an anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegionSpec {
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    /// `{inner ≤ |x| ≤ outer, theta_start ≤ arg x ≤ theta_end}` around the origin.
    AnnularSector {
        inner: f64,
        outer: f64,
        theta_start: f64,
        theta_end: f64,
    },
    Rectangle {
        min: [f64; 2],
        max: [f64; 2],
    },
}

const RADIAL_POINTS: usize = 24;
const ANGULAR_POINTS: usize = 96;
const RECT_POINTS: usize = 24;

impl RegionSpec {
    pub fn disk(center: [f64; 2], radius: f64) -> Self {
        Self::Disk { center, radius }
    }

    pub fn centered_disk(radius: f64) -> Self {
        Self::Disk {
            center: [0.0, 0.0],
            radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidRegion(msg));
        match *self {
            Self::Disk { center, radius } => {
                if !(radius.is_finite() && radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return bad(format!("disk needs a finite center and positive radius, got {radius}"));
                }
            }
            Self::AnnularSector {
                inner,
                outer,
                theta_start,
                theta_end,
            } => {
                if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
                    return bad(format!("annular sector radii must satisfy 0 <= inner < outer, got {inner}, {outer}"));
                }
                let span = theta_end - theta_start;
                if !(span > 0.0 && span <= 2.0 * PI + 1e-12) {
                    return bad(format!("annular sector angular span {span} must lie in (0, 2π]"));
                }
            }
            Self::Rectangle { min, max } => {
                if !(max[0] > min[0] && max[1] > min[1])
                    || !min.iter().chain(max.iter()).all(|c| c.is_finite())
                {
                    return bad("rectangle needs max > min in both coordinates".into());
                }
            }
        }
        Ok(())
    }

    pub fn measure(&self) -> f64 {
        match *self {
            Self::Disk { radius, .. } => PI * radius * radius,
            Self::AnnularSector {
                inner,
                outer,
                theta_start,
                theta_end,
            } => 0.5 * (theta_end - theta_start) * (outer * outer - inner * inner),
            Self::Rectangle { min, max } => (max[0] - min[0]) * (max[1] - min[1]),
        }
    }

    /// Largest distance from the origin to a point of the region.
    pub fn max_extent(&self) -> f64 {
        match *self {
            Self::Disk { center, radius } => center[0].hypot(center[1]) + radius,
            Self::AnnularSector { outer, .. } => outer,
            Self::Rectangle { min, max } => {
                let x = min[0].abs().max(max[0].abs());
                let y = min[1].abs().max(max[1].abs());
                x.hypot(y)
            }
        }
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Self::Disk { center, radius } => (p[0] - center[0]).hypot(p[1] - center[1]) <= radius,
            Self::AnnularSector {
                inner,
                outer,
                theta_start,
                theta_end,
            } => {
                let r = p[0].hypot(p[1]);
                if r < inner || r > outer {
                    return false;
                }
                let t = (p[1].atan2(p[0]) - theta_start).rem_euclid(2.0 * PI);
                t <= theta_end - theta_start
            }
            Self::Rectangle { min, max } => {
                p[0] >= min[0] && p[0] <= max[0] && p[1] >= min[1] && p[1] <= max[1]
            }
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            Self::Disk { center, radius } => {
                format!("disk(center=({}, {}), radius={radius})", center[0], center[1])
            }
            Self::AnnularSector {
                inner,
                outer,
                theta_start,
                theta_end,
            } => format!("annular-sector(r in [{inner}, {outer}], theta in [{theta_start}, {theta_end}])"),
            Self::Rectangle { min, max } => {
                format!("rectangle([{}, {}] x [{}, {}])", min[0], max[0], min[1], max[1])
            }
        }
    }

    /// Quadrature points and weights over the region (weights sum to the measure).
    pub fn quadrature(&self) -> Vec<([f64; 2], f64)> {
        match *self {
            Self::Disk { center, radius } => {
                let (nodes, weights) = gauss_legendre(RADIAL_POINTS);
                let dt = 2.0 * PI / ANGULAR_POINTS as f64;
                let mut out = Vec::with_capacity(RADIAL_POINTS * ANGULAR_POINTS);
                for (s, w) in nodes.iter().zip(&weights) {
                    let r = 0.5 * radius * (s + 1.0);
                    let wr = 0.5 * radius * w * r;
                    for k in 0..ANGULAR_POINTS {
                        let t = (k as f64 + 0.5) * dt;
                        out.push(([center[0] + r * t.cos(), center[1] + r * t.sin()], wr * dt));
                    }
                }
                out
            }
            Self::AnnularSector {
                inner,
                outer,
                theta_start,
                theta_end,
            } => {
                let (nodes, weights) = gauss_legendre(RADIAL_POINTS);
                let half_r = 0.5 * (outer - inner);
                let half_t = 0.5 * (theta_end - theta_start);
                let mut out = Vec::with_capacity(RADIAL_POINTS * RADIAL_POINTS);
                for (s, ws) in nodes.iter().zip(&weights) {
                    let r = inner + half_r * (s + 1.0);
                    for (u, wu) in nodes.iter().zip(&weights) {
                        let t = theta_start + half_t * (u + 1.0);
                        out.push(([r * t.cos(), r * t.sin()], half_r * half_t * ws * wu * r));
                    }
                }
                out
            }
            Self::Rectangle { min, max } => {
                let (nodes, weights) = gauss_legendre(RECT_POINTS);
                let hx = 0.5 * (max[0] - min[0]);
                let hy = 0.5 * (max[1] - min[1]);
                let mut out = Vec::with_capacity(RECT_POINTS * RECT_POINTS);
                for (s, ws) in nodes.iter().zip(&weights) {
                    for (u, wu) in nodes.iter().zip(&weights) {
                        out.push((
                            [min[0] + hx * (s + 1.0), min[1] + hy * (u + 1.0)],
                            hx * hy * ws * wu,
                        ));
                    }
                }
                out
            }
        }
    }

    /// Checks containment in the grid disk and builds the interpolated quadrature.
    pub fn pair_with(&self, grid: &PolarGrid) -> Result<PairedRegion> {
        self.validate()?;
        if self.max_extent() > grid.radius() * (1.0 + 1e-12) {
            return Err(Error::RegionOutsideDisk {
                region: self.describe(),
                radius: grid.radius(),
            });
        }
        let mut points = Vec::new();
        for (p, w) in self.quadrature() {
            let stencil = grid.interpolation_stencil(p).ok_or_else(|| Error::RegionOutsideDisk {
                region: self.describe(),
                radius: grid.radius(),
            })?;
            points.push((stencil, w));
        }
        Ok(PairedRegion {
            points,
            measure: self.measure(),
        })
    }

    /// Node weights `a` with `⨍_ω s ≈ Σ_k a_k s_k`; the weights sum to one.
    pub fn mean_functional(&self, grid: &PolarGrid) -> Result<Vec<f64>> {
        let paired = self.pair_with(grid)?;
        let mut a = vec![0.0; grid.node_count()];
        for (stencil, w) in &paired.points {
            for (&n, &sw) in stencil.nodes.iter().zip(&stencil.weights) {
                a[n] += w * sw / paired.measure;
            }
        }
        Ok(a)
    }
}

/// Region quadrature expressed through grid interpolation stencils.
#[derive(Debug, Clone)]
pub struct PairedRegion {
    pub points: Vec<(Stencil, f64)>,
    pub measure: f64,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}
