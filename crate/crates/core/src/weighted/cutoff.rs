use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{bracket, weight_radial};
use crate::error::{Error, Result};
use crate::geometry::{PolarGrid, ScalarField, VectorField};

/// Upper bound for `‖ψ′‖∞` of the profile (attained value 4 at `r = 3/4`).
pub const PROFILE_D1_SUP: f64 = 4.000000000001;
/// Upper bound for `‖ψ″‖∞` of the profile (attained value 39.364169207324579 near `r = 0.60913`).
pub const PROFILE_D2_SUP: f64 = 39.364169207325;

/// `e^{−1/t}` and its first two derivatives, zero for `t ≤ 0`.
fn mollifier(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / t).exp();
    if f == 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let t2 = t * t;
    (f, f / t2, f * (1.0 - 2.0 * t) / (t2 * t2))
}

/// The profile `1 − S(2r − 1)` with `S(t) = e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)})`,
/// equal to 1 on `r ≤ 1/2` and 0 on `r ≥ 1`. Returns value, first and second derivative.
pub fn profile(r: f64) -> (f64, f64, f64) {
    if r <= 0.5 {
        return (1.0, 0.0, 0.0);
    }
    if r >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let t = 2.0 * r - 1.0;
    let (a, a1, a2) = mollifier(t);
    let (b, b1, b2) = mollifier(1.0 - t);
    // B(t) = f(1 − t), so B′ = −f′(1 − t) and B″ = f″(1 − t)
    let (b1, b2) = (-b1, b2);
    let d = a + b;
    let num = a1 * b - a * b1;
    let s = a / d;
    let s1 = num / (d * d);
    let s2 = (a2 * b - a * b2) / (d * d) - 2.0 * num * (a1 + b1) / (d * d * d);
    (1.0 - s, -2.0 * s1, -4.0 * s2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CutoffKind {
    /// `ψ_n(x) = ψ(log⟨log⟨x⟩⟩ / log⟨log⟨n⟩⟩)`.
    Psi,
    /// `η_n(x) = η(log⟨log⟨log⟨x⟩⟩⟩ / log⟨log⟨log⟨n⟩⟩⟩)`.
    Eta,
}

impl CutoffKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Psi => "psi",
            Self::Eta => "eta",
        }
    }

    /// The radial argument `L(r)` with its first two derivatives.
    fn argument(self, r: f64) -> (f64, f64, f64) {
        let b = bracket(r);
        let l1 = bracket(b.ln());
        match self {
            Self::Psi => {
                let d1 = 1.0 / (b * l1);
                let d2 = -d1 * (1.0 / b + 1.0 / (b * l1));
                (l1.ln(), d1, d2)
            }
            Self::Eta => {
                let l2 = bracket(l1.ln());
                let d1 = 1.0 / (b * l1 * l2);
                let d2 = -d1 * (1.0 / b + 1.0 / (b * l1) + 1.0 / (b * l1 * l2));
                (l2.ln(), d1, d2)
            }
        }
    }
}

/// `γ_n`, the radius of the plateau where the cutoff equals 1.
pub fn plateau_radius(kind: CutoffKind, n: f64) -> Result<f64> {
    let threshold = admissibility_threshold(kind);
    if !(n.is_finite() && n >= threshold) {
        return Err(Error::CutoffInadmissible {
            kind: kind.name(),
            n,
            threshold,
        });
    }
    let l1 = bracket(bracket(n).ln());
    Ok(match kind {
        CutoffKind::Psi => (l1.sqrt() - 1.0).exp() - 1.0,
        CutoffKind::Eta => ((bracket(l1.ln()).sqrt() - 1.0).exp() - 1.0).exp() - 1.0,
    })
}

/// Smallest `n` with `γ_n ≥ 1`.
pub fn admissibility_threshold(kind: CutoffKind) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    match kind {
        CutoffKind::Psi => ((1.0 + ln2).powi(2) - 1.0).exp() - 1.0,
        CutoffKind::Eta => {
            let m = (1.0 + (1.0 + ln2).ln()).powi(2);
            ((m - 1.0).exp() - 1.0).exp() - 1.0
        }
    }
}

/// A member of a cutoff family, supported in `|x| < n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub kind: CutoffKind,
    pub n: f64,
}

/// Closed-form value, gradient and (for `η_n`) Frobenius norm of the Hessian at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffSample {
    pub value: f64,
    pub grad: [f64; 2],
    pub hessian_norm: Option<f64>,
}

impl CutoffFamily {
    pub fn new(kind: CutoffKind, n: f64) -> Result<Self> {
        plateau_radius(kind, n)?;
        Ok(Self { kind, n })
    }

    pub fn plateau_radius(&self) -> f64 {
        plateau_radius(self.kind, self.n).expect("validated at construction")
    }

    /// `L(n)`: `log⟨log⟨n⟩⟩` or `log⟨log⟨log⟨n⟩⟩⟩`.
    pub fn scale(&self) -> f64 {
        self.kind.argument(self.n).0
    }

    pub fn eval(&self, x: [f64; 2]) -> CutoffSample {
        let r = x[0].hypot(x[1]);
        let (l, l1, l2) = self.kind.argument(r);
        let ln = self.scale();
        let (p, p1, p2) = profile(l / ln);
        let value = p;
        let slope = p1 * l1 / ln;
        let grad = if r > 0.0 {
            [slope * x[0] / r, slope * x[1] / r]
        } else {
            [0.0, 0.0]
        };
        let hessian_norm = match self.kind {
            CutoffKind::Psi => None,
            CutoffKind::Eta => {
                // eigenvalues along x̂ and x̂⊥
                let radial = p2 * (l1 / ln).powi(2) + p1 * l2 / ln;
                let tangential = if r > 0.0 { slope / r } else { 0.0 };
                Some(radial.hypot(tangential))
            }
        };
        CutoffSample {
            value,
            grad,
            hessian_norm,
        }
    }

    /// Right side of the explicit gradient bound at `x`.
    pub fn gradient_bound(&self, x: [f64; 2]) -> f64 {
        let r = x[0].hypot(x[1]);
        match self.kind {
            CutoffKind::Psi => PROFILE_D1_SUP / self.scale() * weight_radial(r),
            CutoffKind::Eta => PROFILE_D1_SUP / self.scale() * self.kind.argument(r).1,
        }
    }

    /// Right side of the explicit Hessian bound at `x` (`η_n` only).
    pub fn hessian_bound(&self, x: [f64; 2]) -> Option<f64> {
        match self.kind {
            CutoffKind::Psi => None,
            CutoffKind::Eta => {
                let r = x[0].hypot(x[1]);
                let b = bracket(r);
                let l1 = bracket(b.ln());
                let l2 = bracket(l1.ln());
                Some((4.0 * PROFILE_D1_SUP + 2.0 * PROFILE_D2_SUP) / self.scale() / (b * b * l1 * l2))
            }
        }
    }
}

/// A cutoff sampled at every node of a grid.
#[derive(Debug, Clone)]
pub struct SampledCutoff {
    pub value: ScalarField,
    pub gradient: VectorField,
    pub hessian_norm: Option<ScalarField>,
}

/// Closed-form samples of a cutoff on a grid covering its support.
pub fn sample_cutoff(family: &CutoffFamily, grid: &Arc<PolarGrid>) -> Result<SampledCutoff> {
    if grid.radius() < family.n {
        return Err(Error::GridTooSmall {
            grid_radius: grid.radius(),
            support: family.n,
        });
    }
    let samples: Vec<CutoffSample> = (0..grid.node_count()).map(|k| family.eval(grid.position(k))).collect();
    let value = ScalarField::new(grid, samples.iter().map(|s| s.value).collect())?;
    let gradient = VectorField::new(grid, samples.iter().map(|s| s.grad).collect())?;
    let hessian_norm = match family.kind {
        CutoffKind::Psi => None,
        CutoffKind::Eta => Some(ScalarField::new(
            grid,
            samples.iter().map(|s| s.hessian_norm.unwrap_or(0.0)).collect(),
        )?),
    };
    Ok(SampledCutoff {
        value,
        gradient,
        hessian_norm,
    })
}

/// Worst sampled ratios of the cutoff against its explicit bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffCertificate {
    pub kind: CutoffKind,
    pub n: f64,
    pub plateau_radius: f64,
    pub nodes: usize,
    /// `max |∇c| / bound`; the bound holds at every node iff this is `≤ 1`.
    pub max_gradient_ratio: f64,
    pub max_hessian_ratio: Option<f64>,
    /// Nodes in the plateau where the value is not exactly 1.
    pub plateau_violations: usize,
    /// Nodes outside `|x| < n` where the value is not exactly 0.
    pub support_violations: usize,
}

impl CutoffCertificate {
    pub fn holds(&self) -> bool {
        self.max_gradient_ratio <= 1.0
            && self.max_hessian_ratio.is_none_or(|r| r <= 1.0)
            && self.plateau_violations == 0
            && self.support_violations == 0
    }
}

/// Checks every node of the grid against the explicit cutoff bounds.
pub fn certify_cutoff(family: &CutoffFamily, grid: &Arc<PolarGrid>) -> Result<CutoffCertificate> {
    let sampled = sample_cutoff(family, grid)?;
    let gamma = family.plateau_radius();
    let mut cert = CutoffCertificate {
        kind: family.kind,
        n: family.n,
        plateau_radius: gamma,
        nodes: grid.node_count(),
        max_gradient_ratio: 0.0,
        max_hessian_ratio: sampled.hessian_norm.as_ref().map(|_| 0.0),
        plateau_violations: 0,
        support_violations: 0,
    };
    for k in 0..grid.node_count() {
        let x = grid.position(k);
        let r = x[0].hypot(x[1]);
        let value = sampled.value.values()[k];
        if r <= gamma && value != 1.0 {
            cert.plateau_violations += 1;
        }
        if r >= family.n && value != 0.0 {
            cert.support_violations += 1;
        }
        let g = sampled.gradient.values()[k];
        cert.max_gradient_ratio = cert.max_gradient_ratio.max(g[0].hypot(g[1]) / family.gradient_bound(x));
        if let (Some(hn), Some(worst), Some(bound)) =
            (&sampled.hessian_norm, cert.max_hessian_ratio.as_mut(), family.hessian_bound(x))
        {
            *worst = worst.max(hn.values()[k] / bound);
        }
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_polar_grid;

    #[test]
    fn profile_constants_bound_the_measured_sup_norms() {
        let mut d1: f64 = 0.0;
        let mut d2: f64 = 0.0;
        let m = 200_000;
        for k in 0..=m {
            let (_, a, b) = profile(0.5 + 0.5 * k as f64 / m as f64);
            d1 = d1.max(a.abs());
            d2 = d2.max(b.abs());
        }
        assert!(d1 <= PROFILE_D1_SUP && PROFILE_D1_SUP - d1 < 1e-9, "{d1}");
        assert!(d2 <= PROFILE_D2_SUP && PROFILE_D2_SUP - d2 < 1e-6, "{d2}");
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let e = 1e-6;
        for r in [0.55, 0.61, 0.75, 0.9, 0.97] {
            let (_, d1, d2) = profile(r);
            let fd1 = (profile(r + e).0 - profile(r - e).0) / (2.0 * e);
            let fd2 = (profile(r + e).1 - profile(r - e).1) / (2.0 * e);
            assert!((d1 - fd1).abs() < 1e-6, "{r}");
            assert!((d2 - fd2).abs() < 1e-5, "{r}");
        }
    }

    #[test]
    fn psi_plateau_closed_form() {
        let n = 3f64.exp() - 1.0;
        let g = plateau_radius(CutoffKind::Psi, n).unwrap();
        assert!((g - (std::f64::consts::E - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn plateau_below_n_and_increasing() {
        for kind in [CutoffKind::Psi, CutoffKind::Eta] {
            let mut prev = 0.0;
            let mut n = admissibility_threshold(kind) * 1.001;
            while n < 1e9 {
                let g = plateau_radius(kind, n).unwrap();
                assert!(g < n && g > prev && g >= 1.0);
                prev = g;
                n *= 1.3;
            }
        }
    }

    #[test]
    fn rejects_small_n() {
        assert!(matches!(
            plateau_radius(CutoffKind::Eta, 10.0),
            Err(Error::CutoffInadmissible { kind: "eta", .. })
        ));
        assert!(CutoffFamily::new(CutoffKind::Psi, 5.0).is_err());
    }

    #[test]
    fn plateau_and_support_values_are_exact() {
        let f = CutoffFamily::new(CutoffKind::Psi, 50.0).unwrap();
        let g = f.plateau_radius();
        let inside = f.eval([0.7 * g, 0.1]);
        assert_eq!(inside.value, 1.0);
        assert_eq!(inside.grad, [0.0, 0.0]);
        assert_eq!(f.eval([50.0, 0.0]).value, 0.0);
    }

    #[test]
    fn gradient_matches_differences() {
        let f = CutoffFamily::new(CutoffKind::Eta, 400.0).unwrap();
        let x = [150.0, 90.0];
        let e = 1e-4;
        let s = f.eval(x);
        let gx = (f.eval([x[0] + e, x[1]]).value - f.eval([x[0] - e, x[1]]).value) / (2.0 * e);
        let gy = (f.eval([x[0], x[1] + e]).value - f.eval([x[0], x[1] - e]).value) / (2.0 * e);
        assert!((s.grad[0] - gx).abs() < 1e-9 && (s.grad[1] - gy).abs() < 1e-9);
        let hxx = (f.eval([x[0] + e, x[1]]).grad[0] - f.eval([x[0] - e, x[1]]).grad[0]) / (2.0 * e);
        let hyy = (f.eval([x[0], x[1] + e]).grad[1] - f.eval([x[0], x[1] - e]).grad[1]) / (2.0 * e);
        let hxy = (f.eval([x[0], x[1] + e]).grad[0] - f.eval([x[0], x[1] - e]).grad[0]) / (2.0 * e);
        let fro = (hxx * hxx + hyy * hyy + 2.0 * hxy * hxy).sqrt();
        assert!((fro - s.hessian_norm.unwrap()).abs() < 1e-6 * fro.max(1e-12));
    }

    #[test]
    fn certificates_hold_on_sampled_grids() {
        for (kind, n) in [(CutoffKind::Psi, 30.0), (CutoffKind::Eta, 1000.0)] {
            let family = CutoffFamily::new(kind, n).unwrap();
            let grid = make_polar_grid(n, 48, 64).unwrap();
            let cert = certify_cutoff(&family, &grid).unwrap();
            assert!(cert.holds(), "{cert:?}");
            assert!(cert.max_gradient_ratio > 0.5, "bound should be nearly attained: {cert:?}");
        }
    }

    #[test]
    fn grid_must_cover_support() {
        let family = CutoffFamily::new(CutoffKind::Psi, 30.0).unwrap();
        let grid = make_polar_grid(20.0, 16, 16).unwrap();
        assert!(matches!(sample_cutoff(&family, &grid), Err(Error::GridTooSmall { .. })));
    }
}
