//! Disk solves through the public API.

use planar_leray::geometry::{make_polar_grid, mean_over, RegionSpec, TensorField};
use planar_leray::solver::{solve_disk, test_battery, weak_residual, SolveConfig, StreamSpace};
use planar_leray::sources::{build_tensor_source, manufacture_solution, SourceKind, SourceSpec};
use planar_leray::Error;

#[test]
fn zero_forcing_returns_the_anchor_constant() {
    let g = make_polar_grid(2.0, 16, 32).unwrap();
    let config = SolveConfig::new([0.3, -0.4], RegionSpec::centered_disk(0.5));
    let sol = solve_disk(&g, &TensorField::zeros(&g), &config).unwrap();
    assert!(sol.grad_norm < 1e-14);
    assert!(sol.u.values().iter().all(|u| (u[0] - 0.3).abs() < 1e-14 && (u[1] + 0.4).abs() < 1e-14));
}

#[test]
fn solution_satisfies_its_invariants() {
    let g = make_polar_grid(3.0, 32, 48).unwrap();
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-shear", [0.2, -0.1], 1.0, 0.5);
    let forcing = build_tensor_source(&spec, &g).unwrap().field;
    let omega = RegionSpec::disk([0.5, 0.5], 0.4);
    let config = SolveConfig::new([0.2, 0.1], omega.clone());
    let sol = solve_disk(&g, &forcing, &config).unwrap();

    let mean = mean_over(&sol.u, &omega).unwrap();
    assert!((mean[0] - 0.2).abs() < 1e-10 && (mean[1] - 0.1).abs() < 1e-10);
    assert!(sol.checks.energy_gap.abs() < 1e-8 * sol.forcing_norm.powi(2));
    assert!(sol.grad_norm <= sol.forcing_norm * (1.0 + 1e-8));
    assert!(sol.checks.boundary_error < 1e-12);
    assert!(sol.checks.final_residual <= config.picard_tol * sol.forcing_norm.max(1.0));
    let edge = sol.u.values()[g.index(31, 0)];
    assert!((sol.c[0] - (edge[0] - 0.2)).abs() < 1e-14 && (sol.c[1] - (edge[1] - 0.1)).abs() < 1e-14);

    let space = StreamSpace::new(&g).unwrap();
    let battery = test_battery(&space, 8);
    let r = weak_residual(&space, &sol.velocity(), &forcing, &battery).unwrap();
    assert!(r <= 10.0 * config.picard_tol * sol.forcing_norm.max(1.0), "{r}");
}

#[test]
fn manufactured_solution_is_recovered() {
    let g = make_polar_grid(2.0, 48, 96).unwrap();
    let mut spec = SourceSpec::new(SourceKind::Manufactured, "vortex", [0.0, 0.0], 1.2, 0.1);
    spec.mu = [0.3, 0.0];
    let m = manufacture_solution(&spec, &g).unwrap();
    let omega = RegionSpec::centered_disk(0.5);
    let anchor = mean_over(&m.u_exact, &omega).unwrap();
    let sol = solve_disk(&g, &m.forcing, &SolveConfig::new(anchor, omega)).unwrap();
    let worst = sol
        .u
        .values()
        .iter()
        .zip(m.u_exact.values())
        .map(|(a, b)| (a[0] - b[0]).hypot(a[1] - b[1]))
        .fold(0.0, f64::max);
    assert!(worst < 1e-2, "{worst}");
}

#[test]
fn invalid_configs_are_rejected() {
    let g = make_polar_grid(2.0, 16, 32).unwrap();
    let f = TensorField::zeros(&g);
    let mut config = SolveConfig::new([0.0, 0.0], RegionSpec::centered_disk(0.5));
    config.damping = 0.0;
    assert!(matches!(solve_disk(&g, &f, &config), Err(Error::InvalidConfig(_))));
    let config = SolveConfig::new([0.0, 0.0], RegionSpec::centered_disk(3.0));
    assert!(matches!(solve_disk(&g, &f, &config), Err(Error::RegionOutsideDisk { .. })));
}

#[test]
fn picard_budget_exhaustion_is_reported() {
    let g = make_polar_grid(3.0, 24, 48).unwrap();
    let spec = SourceSpec::new(SourceKind::TensorDirect, "bump-swirl", [0.0, 0.0], 1.5, 8.0);
    let forcing = build_tensor_source(&spec, &g).unwrap().field;
    let mut config = SolveConfig::new([1.0, 0.0], RegionSpec::centered_disk(0.5));
    config.homotopy_steps = 1;
    config.picard_max_iter = 2;
    let err = solve_disk(&g, &forcing, &config).unwrap_err();
    assert!(matches!(err, Error::PicardNonConvergence { .. }), "{err}");
    assert_eq!(err.exit_code(), 3);
}
