//! The weight `𝔴(x) = 1/(⟨x⟩⟨log⟨x⟩⟩)`, the log-log cutoff families, stream
//! function reconstruction by path integration, and numerical Poincaré and
//! Hardy constants on discrete spaces.
//!
//! Throughout, `⟨t⟩ = 1 + |t|`.

mod constants;
mod cutoff;
mod stream;

pub use constants::{
    estimate_constant_dense, estimate_hardy_constant, estimate_poincare_constant, ConstantEstimate,
    Inequality, InequalityForms,
};
pub use cutoff::{
    admissibility_threshold, certify_cutoff, plateau_radius, profile, sample_cutoff, CutoffCertificate,
    CutoffFamily, CutoffKind, CutoffSample, SampledCutoff, PROFILE_D1_SUP, PROFILE_D2_SUP,
};
pub use stream::{reconstruct_stream, stream_along_rays, stream_path_discrepancy, PATH_TOLERANCE};

/// `⟨t⟩ = 1 + |t|`.
#[inline]
pub fn bracket(t: f64) -> f64 {
    1.0 + t.abs()
}

/// `𝔴` as a function of `|x|`.
#[inline]
pub fn weight_radial(r: f64) -> f64 {
    let b = bracket(r);
    1.0 / (b * bracket(b.ln()))
}

/// `𝔴(x) = 1/((1+|x|)(1+log(1+|x|)))`: equal to 1 at the origin, radially
/// non-increasing, and integrable in square over the plane.
pub fn weight_w(x: [f64; 2]) -> f64 {
    weight_radial(x[0].hypot(x[1]))
}

/// `log⟨log⟨x⟩⟩`, the antiderivative of `𝔴` along rays.
pub fn log_log(r: f64) -> f64 {
    bracket(bracket(r).ln()).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_closed_forms() {
        assert_eq!(weight_w([0.0, 0.0]), 1.0);
        let r = std::f64::consts::E - 1.0;
        let expected = 1.0 / (2.0 * std::f64::consts::E);
        assert!((weight_w([r, 0.0]) - expected).abs() < 1e-15);
    }

    #[test]
    fn weight_times_brackets_is_one() {
        for k in 0..200 {
            let r = 1e-3 * 1.1f64.powi(k);
            let prod = weight_radial(r) * bracket(r) * bracket(bracket(r).ln());
            assert!((prod - 1.0).abs() < 4.0 * f64::EPSILON);
        }
    }

    #[test]
    fn log_log_is_antiderivative_of_weight() {
        let r = 3.7;
        let e = 1e-5;
        let d = (log_log(r + e) - log_log(r - e)) / (2.0 * e);
        assert!((d - weight_radial(r)).abs() < 1e-9);
    }
}
