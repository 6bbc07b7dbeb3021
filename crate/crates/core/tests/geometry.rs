//! Grid, field and operator behaviour through the public API.

use std::f64::consts::PI;

use planar_leray::geometry::{
    divergence, field_to_csv, gradient, inner_product_l2, l2_norm, make_polar_grid, mean_over,
    perp_gradient, vector_gradient, RegionSpec, ScalarField, VectorField,
};
use planar_leray::Error;

#[test]
fn grid_rejects_bad_parameters() {
    assert!(matches!(make_polar_grid(0.0, 16, 32), Err(Error::InvalidGrid(_))));
    assert!(matches!(make_polar_grid(f64::NAN, 16, 32), Err(Error::InvalidGrid(_))));
    assert!(matches!(make_polar_grid(1.0, 1, 32), Err(Error::InvalidGrid(_))));
    assert!(matches!(make_polar_grid(1.0, 16, 3), Err(Error::InvalidGrid(_))));
}

#[test]
fn outer_ring_sits_on_the_boundary() {
    let g = make_polar_grid(3.0, 24, 48).unwrap();
    let r = g.radial_nodes();
    assert!((r[r.len() - 1] - 3.0).abs() < 1e-14);
    assert!(r.windows(2).all(|w| w[1] > w[0]));
    assert!(r[0] > 0.0);
}

#[test]
fn quadrature_integrates_polynomials() {
    let g = make_polar_grid(2.0, 64, 128).unwrap();
    let w = g.quadrature_weights();
    let area: f64 = w.iter().sum();
    assert!((area - 4.0 * PI).abs() < 1e-6 * area);
    // ∫ r² dA = π R⁴ / 2
    let second: f64 = (0..g.node_count())
        .map(|k| {
            let [x, y] = g.position(k);
            w[k] * (x * x + y * y)
        })
        .sum();
    assert!((second - 8.0 * PI).abs() < 1e-5 * second);
}

#[test]
fn divergence_of_perp_gradient_vanishes_inside() {
    let g = make_polar_grid(2.0, 48, 96).unwrap();
    let s = ScalarField::from_fn(&g, |x, y| (-(x * x + 2.0 * y * y)).exp());
    let div = divergence(&perp_gradient(&s));
    let interior = (0..g.node_count()).filter(|&k| g.ring_of(k) < g.n_r() - 2);
    let worst = interior.map(|k| div.values()[k].abs()).fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn gradient_converges_at_second_order() {
    let err = |n: usize| {
        let g = make_polar_grid(1.5, n, 2 * n).unwrap();
        let s = ScalarField::from_fn(&g, |x, y| (x - 0.3 * y).sin() * (0.5 * y).cos());
        let exact = VectorField::from_fn(&g, |x, y| {
            let (a, b) = (x - 0.3 * y, 0.5 * y);
            [a.cos() * b.cos(), -0.3 * a.cos() * b.cos() - 0.5 * a.sin() * b.sin()]
        });
        let diff = gradient(&s).sub(&exact).unwrap();
        l2_norm(&diff, Some(&RegionSpec::centered_disk(1.0))).unwrap()
    };
    let (e1, e2, e3) = (err(16), err(32), err(64));
    assert!(e1 / e2 > 3.0 && e2 / e3 > 3.0, "{e1} {e2} {e3}");
}

#[test]
fn vector_gradient_matches_componentwise_gradient() {
    let g = make_polar_grid(1.0, 16, 32).unwrap();
    let v = VectorField::from_fn(&g, |x, y| [x * y, x - y * y]);
    let t = vector_gradient(&v);
    let gx = gradient(&ScalarField::from_fn(&g, |x, y| x * y));
    for k in 0..g.node_count() {
        assert!((t.values()[k][0][0] - gx.values()[k][0]).abs() < 1e-12);
        assert!((t.values()[k][0][1] - gx.values()[k][1]).abs() < 1e-12);
    }
}

#[test]
fn mean_of_constant_is_exact_on_every_region_kind() {
    let g = make_polar_grid(3.0, 32, 64).unwrap();
    let v = VectorField::constant(&g, [0.7, -1.2]);
    let regions = [
        RegionSpec::disk([0.4, -0.2], 0.8),
        RegionSpec::AnnularSector {
            inner: 0.5,
            outer: 1.5,
            theta_start: 0.0,
            theta_end: 2.0,
        },
        RegionSpec::Rectangle {
            min: [-1.0, -0.5],
            max: [0.5, 1.0],
        },
    ];
    for omega in &regions {
        let m = mean_over(&v, omega).unwrap();
        assert!((m[0] - 0.7).abs() < 1e-12 && (m[1] + 1.2).abs() < 1e-12, "{omega:?}");
    }
}

#[test]
fn region_outside_disk_is_rejected() {
    let g = make_polar_grid(1.0, 16, 32).unwrap();
    let v = VectorField::zeros(&g);
    let err = mean_over(&v, &RegionSpec::disk([0.8, 0.0], 0.5)).unwrap_err();
    assert!(matches!(err, Error::RegionOutsideDisk { .. }));
}

#[test]
fn inner_product_requires_matching_grids() {
    let a = make_polar_grid(1.0, 16, 32).unwrap();
    let b = make_polar_grid(1.0, 16, 48).unwrap();
    let err = inner_product_l2(&ScalarField::zeros(&a), &ScalarField::zeros(&b), None).unwrap_err();
    assert!(matches!(err, Error::GridMismatch));
}

#[test]
fn csv_dump_has_header_and_one_row_per_node() {
    let g = make_polar_grid(1.0, 8, 16).unwrap();
    let csv = field_to_csv(&VectorField::constant(&g, [1.0, 2.0]));
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("r,theta,"));
    assert_eq!(lines.count(), g.node_count());
}
