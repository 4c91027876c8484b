use std::f64::consts::PI;

use approx::assert_relative_eq;
use lagcurv::flow::{
    classify_monotonicity, integrate_flow, jacobi_frames, q_form, uniform_grid, FlowOptions, JetOptions, Monotonicity,
    VerticalDistribution,
};
use lagcurv::models::{linear_in_momentum, make_kepler, make_oscillator, saddle, Kepler, NaturalSystem, PolynomialPotential, Sphere};
use lagcurv::reduction::{reduced_curvature, ricci_curvature, IntegralTuple};
use lagcurv::ErrorKind;
use nalgebra::{DMatrix, DVector};

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_row_slice(x)
}

#[test]
fn oscillator_quarter_period_rotates_phase_plane() {
    let osc = make_oscillator(&[1.0]);
    let traj = integrate_flow(&osc, &v(&[1.0, 0.0]), &[0.0, PI / 2.0], &FlowOptions::default()).unwrap();
    let end = &traj.states[1];
    assert!((end[0]).abs() < 1e-9 && (end[1] - 1.0).abs() < 1e-9, "{end}");
    assert!(traj.energy_ok());
}

#[test]
fn kepler_circular_orbit_keeps_its_radius() {
    let (kepler, _) = make_kepler();
    let r = 1.5;
    let z0 = Kepler::state(r, Kepler::circular_momentum(r), 0.0);
    let traj = integrate_flow(&kepler, &z0, &uniform_grid(0.0, 20.0, 41), &FlowOptions::default()).unwrap();
    for z in &traj.states {
        assert!((z[2] - r).abs() < 1e-9);
        assert!((z[1] - z0[1]).abs() < 1e-12);
    }
    assert!(traj.energy_ok());
}

#[test]
fn vertical_jacobi_curve_starts_vertical_and_stays_lagrangian() {
    let osc = make_oscillator(&[1.0, 2.0]);
    let frames =
        jacobi_frames(&osc, &v(&[0.3, -0.2, 0.5, 0.1]), &VerticalDistribution { n: 2 }, &uniform_grid(0.0, 3.0, 13), &FlowOptions::default())
            .unwrap();
    let vertical = lagcurv::symplectic::LagrangianFrame::vertical(2);
    assert!(frames[0].1.distance(&vertical) < 1e-12);
    for (_, f) in &frames {
        assert!(lagcurv::symplectic::check_lagrangian(f).isotropy_defect < 1e-9);
    }
}

#[test]
fn kepler_q_form_is_inverse_metric() {
    let (kepler, _) = make_kepler();
    let q = q_form(&kepler, &Kepler::state(2.0, 0.7, 0.1), &VerticalDistribution { n: 2 }).unwrap();
    assert_relative_eq!(q, DMatrix::from_diagonal(&v(&[1.0, 0.25])), epsilon = 1e-10);
}

#[test]
fn monotonicity_classes() {
    let field = VerticalDistribution { n: 2 };
    let z = v(&[0.4, 0.1, -0.3, 0.2]);
    let osc = make_oscillator(&[1.0, 1.0]);
    assert_eq!(classify_monotonicity(&osc, &z, &field).unwrap().class, Monotonicity::MonotoneIncreasing);
    assert_eq!(classify_monotonicity(&saddle(), &z, &field).unwrap().class, Monotonicity::Regular);
    assert_eq!(classify_monotonicity(&linear_in_momentum(), &z, &field).unwrap().class, Monotonicity::Degenerate);
}

#[test]
fn kepler_without_angular_momentum_reduces_to_radial_curvature() {
    let (kepler, p_phi) = make_kepler();
    let ints = IntegralTuple::single(2, p_phi).unwrap();
    let rc = reduced_curvature(&kepler, &ints, &Kepler::state(2.0, 0.0, 0.3), true, &JetOptions::default()).unwrap();
    assert_relative_eq!(rc.reduced_ricci, -0.25, epsilon = 1e-10);
    assert_relative_eq!(rc.reduced_ricci, Kepler::radial_curvature(2.0), epsilon = 1e-10);
}

#[test]
fn kepler_reduced_operator_matches_amended_potential_from_jets() {
    let (kepler, p_phi) = make_kepler();
    let ints = IntegralTuple::single(2, p_phi).unwrap();
    let (r, c) = (1.3, 0.8);
    let rc = reduced_curvature(&kepler, &ints, &Kepler::state(r, c, 0.2), false, &JetOptions::default()).unwrap();
    assert_relative_eq!(rc.reduced_operator[(0, 0)], Kepler::reduced_radial_curvature(r, c), epsilon = 1e-7);
}

#[test]
fn natural_system_ricci_is_laplacian_of_potential() {
    let mut u = PolynomialPotential::quadratic(&[1.0, 3.0]);
    u.add_term(vec![3, 0], 0.5);
    u.add_term(vec![1, 2], -0.25);
    let sys = NaturalSystem::new("cubic", u);
    let z = v(&[0.2, -0.4, 0.3, 0.6]);
    let q = v(&[0.3, 0.6]);
    let expected = sys.laplacian(&q);
    for prefer_oracle in [true, false] {
        let rho = ricci_curvature(&sys, &z, None, prefer_oracle, &JetOptions::default()).unwrap().original;
        assert_relative_eq!(rho, expected, epsilon = 1e-7);
    }
}

#[test]
fn sphere_ricci_is_twice_the_energy() {
    let z = Sphere::unit_speed_state(1.1, 0.4, 0.7);
    let rho = ricci_curvature(&Sphere, &z, None, false, &JetOptions::default()).unwrap().original;
    assert_relative_eq!(rho, 1.0, epsilon = 1e-7);
}

#[test]
fn domain_violations_are_reported_as_domain_errors() {
    let (kepler, _) = make_kepler();
    let err = integrate_flow(&kepler, &v(&[0.0, 1.0, -1.0, 0.0]), &[0.0, 1.0], &FlowOptions::default()).unwrap_err();
    assert_eq!(err.kind(), ErrorKind::Domain);
}
