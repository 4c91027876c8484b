use std::f64::consts::PI;
use std::sync::Arc;

use lagcurv::flow::VerticalDistribution;
use lagcurv::focal::{alternation_report, focal_scan, focal_times, reduced_focal_times, FocalOptions};
use lagcurv::models::{make_kepler, make_oscillator, AngularMomentum, Kepler, Sphere};
use lagcurv::reduction::IntegralTuple;
use nalgebra::DVector;

fn opts() -> FocalOptions {
    FocalOptions { grid_points: 400, ..FocalOptions::default() }
}

#[test]
fn sphere_geodesic_first_conjugate_time_is_pi() {
    let z = Sphere::unit_speed_state(1.2, 0.0, 0.4);
    let recs = focal_times(&Sphere, &z, Arc::new(VerticalDistribution { n: 2 }), (0.0, 4.0), &opts()).unwrap();
    assert_eq!(recs.len(), 1);
    assert!((recs[0].time - PI).abs() < 1e-8, "{}", recs[0].time);
    assert_eq!(recs[0].multiplicity, 1);
}

#[test]
fn empty_reduction_reproduces_original_times() {
    let osc = make_oscillator(&[1.0, 1.7]);
    let z = DVector::from_row_slice(&[0.5, 0.2, 0.1, -0.3]);
    let window = (0.0, 7.0);
    let orig = focal_times(&osc, &z, Arc::new(VerticalDistribution { n: 2 }), window, &opts()).unwrap();
    let red = reduced_focal_times(&osc, &IntegralTuple::empty(2), &z, window, &opts()).unwrap();
    assert_eq!(orig.len(), red.len());
    for (a, b) in orig.iter().zip(&red) {
        assert!((a.time - b.time).abs() < 1e-12);
        assert_eq!(a.multiplicity, b.multiplicity);
    }
}

/// The reduced dynamics of a circular Kepler orbit of radius 1 is the
/// linearised radial oscillation in the amended potential, of frequency 1.
#[test]
fn kepler_circular_orbit_reduced_focal_times_are_multiples_of_pi() {
    let (kepler, p_phi) = make_kepler();
    let ints = IntegralTuple::single(2, p_phi).unwrap();
    let z = Kepler::state(1.0, 1.0, 0.0);
    let scan = focal_scan(&kepler, &ints, &z, (0.0, 7.0), &opts()).unwrap();
    let times: Vec<f64> = scan.reduceds.iter().map(|r| r.time).collect();
    assert_eq!(times.len(), 2, "{times:?}");
    for (k, t) in times.iter().enumerate() {
        assert!((t - (k + 1) as f64 * PI).abs() < 1e-7, "{times:?}");
    }
    let report = alternation_report(&scan, 1);
    assert!(report.inequality_ok && report.alternating_ok == Some(true) && report.first_reduced_first, "{report:?}");
}

#[test]
fn rotation_reduction_of_anisotropic_oscillator_interlaces() {
    let osc = make_oscillator(&[1.0, 1.3]);
    let ints = IntegralTuple::single(2, Arc::new(AngularMomentum::new(2, vec![(0, 1)]))).unwrap();
    let z = DVector::from_row_slice(&[0.3, 0.8, 0.9, -0.2]);
    let scan = focal_scan(&osc, &ints, &z, (0.0, 10.0), &opts()).unwrap();
    assert!(!scan.originals.is_empty());
    let report = alternation_report(&scan, 1);
    assert!(report.inequality_ok && report.alternating_ok == Some(true) && report.first_reduced_first, "{report:?}");
    let orig: usize = scan.originals.iter().map(|r| r.multiplicity).sum();
    let red: usize = scan.reduceds.iter().map(|r| r.multiplicity).sum();
    assert!(orig <= red && red <= orig + 1, "{orig} vs {red}");
}
