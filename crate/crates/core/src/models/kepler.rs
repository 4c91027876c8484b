use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::HamiltonianModel;

use super::integrals::{Momentum, SharedIntegral};

/// Planar Kepler problem in polar coordinates, state (p_r, p_φ, r, φ):
/// H = p_r²/2 + p_φ²/(2r²) − 1/r.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kepler;

impl Kepler {
    /// Original curvature on ∂p_r: U″(r) = −2/r³.
    pub fn radial_curvature(r: f64) -> f64 {
        -2.0 / r.powi(3)
    }

    /// Reduced curvature on ∂p_r: second derivative of the amended potential
    /// U_a = c²/(2r²) − 1/r, i.e. 3c²/r⁴ − 2/r³.
    pub fn reduced_radial_curvature(r: f64, c: f64) -> f64 {
        3.0 * c * c / r.powi(4) - 2.0 / r.powi(3)
    }

    /// Angular momentum of the circular orbit of radius r: c = √r.
    pub fn circular_momentum(r: f64) -> f64 {
        r.sqrt()
    }

    /// State at radius r with p_r, p_φ = c, φ = 0.
    pub fn state(r: f64, c: f64, p_r: f64) -> DVector<f64> {
        DVector::from_vec(vec![p_r, c, r, 0.0])
    }
}

impl HamiltonianModel for Kepler {
    fn name(&self) -> &str {
        "kepler"
    }

    fn dof(&self) -> usize {
        2
    }

    fn energy(&self, z: &DVector<f64>) -> f64 {
        let (pr, pf, r) = (z[0], z[1], z[2]);
        0.5 * pr * pr + pf * pf / (2.0 * r * r) - 1.0 / r
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let (pr, pf, r) = (z[0], z[1], z[2]);
        DVector::from_vec(vec![pr, pf / (r * r), -pf * pf / r.powi(3) + 1.0 / (r * r), 0.0])
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let (pf, r) = (z[1], z[2]);
        let mut h = DMatrix::zeros(4, 4);
        h[(0, 0)] = 1.0;
        h[(1, 1)] = 1.0 / (r * r);
        h[(1, 2)] = -2.0 * pf / r.powi(3);
        h[(2, 1)] = h[(1, 2)];
        h[(2, 2)] = 3.0 * pf * pf / r.powi(4) - 2.0 / r.powi(3);
        h
    }

    fn check_domain(&self, z: &DVector<f64>) -> Result<()> {
        if z[2] > 0.0 && z[2].is_finite() {
            Ok(())
        } else {
            Err(Error::Domain { model: "kepler".into(), detail: format!("r = {} ≤ 0", z[2]) })
        }
    }

    /// The polar chart of the flat plane: covariant Hessian of U = −1/r
    /// written on the impulse basis, diag(U″, U′/r³).
    fn curvature_form_oracle(&self, z: &DVector<f64>) -> Option<DMatrix<f64>> {
        let r = z[2];
        Some(DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0 / r.powi(3), 1.0 / r.powi(5)])))
    }
}

/// The Kepler model together with its first integral g = p_φ.
pub fn make_kepler() -> (Kepler, SharedIntegral) {
    (Kepler, std::sync::Arc::new(Momentum::new("p_phi", 2, 1)))
}
