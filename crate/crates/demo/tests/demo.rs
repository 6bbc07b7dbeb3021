//! The demo operations on native targets.

use planar_leray_demo::{cutoff_view, gate_view, swirl_solve};

#[test]
fn swirl_solve_reports_a_consistent_state() {
    let view = swirl_solve(2.0, 24, 48, 0.5, [0.2, 0.0]).unwrap();
    assert!(view.grad_norm > 0.0 && view.grad_norm <= view.forcing_norm * (1.0 + 1e-8));
    assert!(view.energy_gap.abs() < 1e-8 * view.forcing_norm.powi(2));
    assert_eq!(view.samples.len(), 12 * 24);
    let json = serde_json::to_value(&view).unwrap();
    assert!(json["samples"][0].as_array().unwrap().len() == 4);
}

#[test]
fn swirl_solve_refuses_large_grids() {
    assert!(swirl_solve(2.0, 128, 128, 0.5, [0.0, 0.0]).is_err());
}

#[test]
fn cutoff_profile_stays_under_its_bound() {
    for kind in ["psi", "eta"] {
        let view = cutoff_view(kind, 1000.0, 400).unwrap();
        assert_eq!(view.value[0], 1.0);
        assert_eq!(*view.value.last().unwrap(), 0.0);
        assert!(view.gradient.iter().zip(&view.gradient_bound).all(|(g, b)| g <= b));
    }
    assert!(cutoff_view("phi", 100.0, 10).is_err());
    assert!(cutoff_view("psi", 1.0, 10).is_err());
}

#[test]
fn gate_separates_net_force_from_divergence_sources() {
    let bad = gate_view("net-force", [0.0, 0.0], 1.2).unwrap();
    assert!(!bad.accepted);
    assert!(bad.integrals[0].hypot(bad.integrals[1]) > bad.tolerance);
    let good = gate_view("curl-bump", [0.05, 0.0], 1.4).unwrap();
    assert!(good.accepted, "{}", good.message);
}
