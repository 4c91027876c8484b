use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::HamiltonianModel;

/// Chart guard on sin θ.
const POLE_GUARD: f64 = 1e-6;

/// Geodesic flow of the round unit 2-sphere in the chart (θ, φ):
/// H = ½ (p_θ² + p_φ² / sin²θ), state (p_θ, p_φ, θ, φ).
#[derive(Debug, Clone, Copy, Default)]
pub struct Sphere;

impl Sphere {
    /// Unit-speed state at colatitude θ heading at angle `heading` from the
    /// parallel (heading 0 runs along the parallel towards increasing φ).
    pub fn unit_speed_state(theta: f64, phi: f64, heading: f64) -> DVector<f64> {
        let s = theta.sin();
        DVector::from_vec(vec![-heading.sin(), heading.cos() * s, theta, phi])
    }
}

impl HamiltonianModel for Sphere {
    fn name(&self) -> &str {
        "sphere"
    }

    fn dof(&self) -> usize {
        2
    }

    fn energy(&self, z: &DVector<f64>) -> f64 {
        let s = z[2].sin();
        0.5 * (z[0] * z[0] + z[1] * z[1] / (s * s))
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let (pt, pf, th) = (z[0], z[1], z[2]);
        let (s, c) = th.sin_cos();
        DVector::from_vec(vec![pt, pf / (s * s), -pf * pf * c / s.powi(3), 0.0])
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let (pf, th) = (z[1], z[2]);
        let (s, c) = th.sin_cos();
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0 / (s * s);
        h[(1, 2)] = -2.0 * pf * c / s.powi(3);
        h[(2, 1)] = h[(1, 2)];
        h[(2, 2)] = pf * pf * (s * s + 3.0 * c * c) / s.powi(4);
        h
    }

    fn check_domain(&self, z: &DVector<f64>) -> Result<()> {
        let s = z[2].sin();
        if s.abs() > POLE_GUARD && z[2] > 0.0 && z[2] < std::f64::consts::PI {
            Ok(())
        } else {
            Err(Error::Domain { model: "sphere".into(), detail: format!("θ = {} is at a chart pole", z[2]) })
        }
    }

    /// Sectional curvature 1 on the impulse basis: ‖p‖²G⁻¹ − G⁻¹ppᵀG⁻¹.
    fn curvature_form_oracle(&self, z: &DVector<f64>) -> Option<DMatrix<f64>> {
        let s = z[2].sin();
        let ginv = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0 / (s * s)]));
        let p = DVector::from_vec(vec![z[0], z[1]]);
        let gp = &ginv * &p;
        let speed2 = p.dot(&gp);
        Some(&ginv * speed2 - &gp * gp.transpose())
    }
}

pub fn make_sphere_geodesic() -> Sphere {
    Sphere
}
