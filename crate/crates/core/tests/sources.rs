//! Catalog sources, the zero-mean gate and the lift to a tensor.

use planar_leray::geometry::{make_polar_grid, RegionSpec};
use planar_leray::solver::{test_battery, StreamSpace};
use planar_leray::sources::{
    build_forcing, build_tensor_source, build_vector_source, lift_vector_source, manufacture_solution,
    pairing_residual, source_integrals, SourceKind, SourceSpec,
};
use planar_leray::Error;

#[test]
fn every_tensor_shape_is_supported_and_nonzero() {
    let g = make_polar_grid(2.0, 32, 64).unwrap();
    for shape in ["bump-identity", "bump-shear", "bump-swirl", "bump-stretch"] {
        let spec = SourceSpec::new(SourceKind::TensorDirect, shape, [0.1, 0.2], 0.9, 1.0);
        let src = build_tensor_source(&spec, &g).unwrap();
        assert!(src.l2_norm > 0.0, "{shape}");
        assert!(!src.field.is_zero());
    }
}

#[test]
fn unknown_shape_and_wrong_kind_are_rejected() {
    let g = make_polar_grid(2.0, 16, 32).unwrap();
    let spec = SourceSpec::new(SourceKind::TensorDirect, "spiral", [0.0, 0.0], 0.5, 1.0);
    assert!(matches!(build_tensor_source(&spec, &g), Err(Error::UnknownShape(_))));
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.0, 0.0], 0.5, 1.0);
    assert!(matches!(manufacture_solution(&spec, &g), Err(Error::WrongSourceKind { .. })));
}

#[test]
fn support_must_fit_in_the_grid() {
    let g = make_polar_grid(1.0, 16, 32).unwrap();
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.5, 0.0], 0.6, 1.0);
    assert!(matches!(
        build_tensor_source(&spec, &g),
        Err(Error::SourceOutsideGrid { .. })
    ));
}

#[test]
fn gate_rejects_net_force() {
    let g = make_polar_grid(1.5, 64, 128).unwrap();
    let spec = SourceSpec::new(SourceKind::VectorCompact, "net-force", [0.0, 0.0], 1.2, 1.0);
    let f = build_vector_source(&spec, &g).unwrap();
    let (integrals, l1) = source_integrals(&f);
    assert!(integrals[0].hypot(integrals[1]) > 1e-3 * l1);
    let err = lift_vector_source(&f, &g, &RegionSpec::centered_disk(0.3)).unwrap_err();
    assert!(matches!(err, Error::ZeroMeanGate { .. }));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn lifted_divergence_source_pairs_with_test_fields() {
    let g = make_polar_grid(1.5, 64, 128).unwrap();
    let spec = SourceSpec::new(SourceKind::VectorCompact, "curl-bump", [0.05, 0.0], 1.4, 1.0);
    let f = build_vector_source(&spec, &g).unwrap();
    let lifted = lift_vector_source(&f, &g, &RegionSpec::centered_disk(0.3)).unwrap();
    let space = StreamSpace::new(&g).unwrap();
    for chi in test_battery(&space, 10) {
        let r = pairing_residual(&space, &f, &lifted.forcing, &chi).unwrap();
        assert!(r < 1e-2, "{r}");
    }
}

#[test]
fn build_forcing_matches_direct_construction() {
    let g = make_polar_grid(2.0, 24, 48).unwrap();
    let omega = RegionSpec::centered_disk(0.5);
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-swirl", [0.0, 0.3], 0.8, 0.5);
    let a = build_forcing(&spec, &g, &omega).unwrap();
    let b = build_tensor_source(&spec, &g).unwrap().field;
    assert_eq!(a.values(), b.values());
}

#[test]
fn manufactured_velocity_is_constant_outside_the_support() {
    let g = make_polar_grid(2.0, 32, 64).unwrap();
    let mut spec = SourceSpec::new(SourceKind::Manufactured, "dipole", [0.1, 0.0], 1.0, 0.2);
    spec.mu = [0.5, -0.1];
    let m = manufacture_solution(&spec, &g).unwrap();
    for k in 0..g.node_count() {
        let [x, y] = g.position(k);
        if (x - 0.1).hypot(y) >= 1.0 {
            assert_eq!(m.u_exact.values()[k], [0.5, -0.1]);
            assert_eq!(m.forcing.values()[k], [[0.0; 2]; 2]);
        }
    }
}
