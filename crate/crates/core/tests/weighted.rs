//! Weight, cutoff families, stream reconstruction and discrete constants.

use planar_leray::geometry::{make_polar_grid, perp_gradient, RegionSpec, ScalarField, VectorField};
use planar_leray::weighted::{
    admissibility_threshold, certify_cutoff, estimate_constant_dense, estimate_hardy_constant,
    estimate_poincare_constant, plateau_radius, reconstruct_stream, weight_radial, CutoffFamily,
    CutoffKind, Inequality, InequalityForms,
};
use planar_leray::Error;

#[test]
fn weight_is_one_at_origin_and_decreasing() {
    assert_eq!(weight_radial(0.0), 1.0);
    let mut prev = 1.0;
    for k in 1..200 {
        let w = weight_radial(k as f64 * 0.5);
        assert!(w < prev && w > 0.0);
        prev = w;
    }
}

#[test]
fn plateau_radius_reaches_one_at_the_threshold() {
    for kind in [CutoffKind::Psi, CutoffKind::Eta] {
        let n = admissibility_threshold(kind);
        assert!((plateau_radius(kind, n).unwrap() - 1.0).abs() < 1e-9);
        assert!(matches!(
            plateau_radius(kind, 0.99 * n),
            Err(Error::CutoffInadmissible { .. })
        ));
    }
}

#[test]
fn cutoffs_certify_on_grids_covering_their_support() {
    for (kind, n) in [(CutoffKind::Psi, 30.0), (CutoffKind::Eta, 100.0)] {
        let family = CutoffFamily::new(kind, n).unwrap();
        let g = make_polar_grid(n * 1.1, 64, 64).unwrap();
        let cert = certify_cutoff(&family, &g).unwrap();
        assert!(cert.holds(), "{cert:?}");
        assert_eq!(cert.max_hessian_ratio.is_some(), kind == CutoffKind::Eta);
    }
}

#[test]
fn certify_requires_a_large_enough_grid() {
    let family = CutoffFamily::new(CutoffKind::Psi, 30.0).unwrap();
    let g = make_polar_grid(10.0, 16, 32).unwrap();
    assert!(matches!(certify_cutoff(&family, &g), Err(Error::GridTooSmall { .. })));
}

#[test]
fn stream_of_perp_gradient_is_recovered() {
    let g = make_polar_grid(2.0, 48, 96).unwrap();
    let psi = ScalarField::from_fn(&g, |x, y| (-(x * x + y * y)).exp() * (1.0 + 0.3 * x));
    let v = perp_gradient(&psi);
    let rec = reconstruct_stream(&v).unwrap();
    let offset = psi.values()[0] - rec.values()[0];
    let worst = psi
        .values()
        .iter()
        .zip(rec.values())
        .map(|(a, b)| (a - b - offset).abs())
        .fold(0.0, f64::max);
    assert!(worst < 2e-2, "{worst}");
}

#[test]
fn radial_source_is_not_solenoidal() {
    let g = make_polar_grid(1.0, 32, 64).unwrap();
    let v = VectorField::from_fn(&g, |x, y| [x, y]);
    assert!(matches!(reconstruct_stream(&v), Err(Error::NotSolenoidal { .. })));
}

#[test]
fn constants_bound_sample_fields_and_match_dense_solve() {
    let g = make_polar_grid(2.0, 12, 24).unwrap();
    let anchor = RegionSpec::centered_disk(0.5);
    for (inequality, estimate) in [
        (Inequality::Poincare, estimate_poincare_constant(&g, &anchor).unwrap()),
        (Inequality::Hardy, estimate_hardy_constant(&g, &anchor).unwrap()),
    ] {
        let dense = estimate_constant_dense(&g, &anchor, inequality).unwrap();
        assert!((estimate.value - dense[0].sqrt()).abs() < 1e-8 * estimate.value);
        let forms = InequalityForms::new(&g, &anchor, inequality).unwrap();
        for k in 0..20 {
            let u: Vec<f64> = (0..g.node_count())
                .map(|i| ((i * 7919 + k * 104729) % 1013) as f64 / 1013.0 - 0.5)
                .collect();
            assert!(forms.ratio(&u) <= estimate.value);
        }
    }
}

#[test]
fn hardy_constant_is_below_poincare_constant() {
    let g = make_polar_grid(4.0, 24, 48).unwrap();
    let anchor = RegionSpec::centered_disk(0.5);
    let p = estimate_poincare_constant(&g, &anchor).unwrap().value;
    let h = estimate_hardy_constant(&g, &anchor).unwrap().value;
    assert!(h < p, "{h} {p}");
}

proptest::proptest! {
    #[test]
    fn cutoff_bounds_hold_at_random_points(
        eta in proptest::bool::ANY,
        log_n in 3.0f64..12.0,
        frac in 0.0f64..1.2,
        angle in 0.0f64..std::f64::consts::TAU,
    ) {
        let kind = if eta { CutoffKind::Eta } else { CutoffKind::Psi };
        let n = log_n.exp().max(admissibility_threshold(kind));
        let family = CutoffFamily::new(kind, n).unwrap();
        let x = [frac * n * angle.cos(), frac * n * angle.sin()];
        let s = family.eval(x);
        proptest::prop_assert!((0.0..=1.0).contains(&s.value));
        proptest::prop_assert!(s.grad[0].hypot(s.grad[1]) <= family.gradient_bound(x));
        if let (Some(h), Some(b)) = (s.hessian_norm, family.hessian_bound(x)) {
            proptest::prop_assert!(h <= b);
        }
        if frac * n <= family.plateau_radius() {
            proptest::prop_assert_eq!(s.value, 1.0);
        }
        if frac >= 1.0 {
            proptest::prop_assert_eq!(s.value, 0.0);
        }
    }
}
