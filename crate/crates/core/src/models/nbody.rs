use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};

use crate::error::{Error, Result};
use crate::flow::HamiltonianModel;

use super::integrals::{AngularMomentum, SharedIntegral};

/// Minimum admissible pairwise distance.
pub const COLLISION_GUARD: f64 = 1e-6;

/// Planar N-body problem with unit masses and unit gravitational constant.
/// State (p, q) with q = (x₁, y₁, …, x_N, y_N): H = ½‖p‖² − Σ_{i<j} 1/r_ij.
#[derive(Debug, Clone, Copy)]
pub struct NBody {
    bodies: usize,
}

impl NBody {
    pub fn new(bodies: usize) -> Result<Self> {
        if bodies < 2 {
            return Err(Error::Input("the N-body problem needs at least two bodies".into()));
        }
        Ok(Self { bodies })
    }

    pub fn bodies(&self) -> usize {
        self.bodies
    }

    fn position(&self, q: &[f64], i: usize) -> Vector2<f64> {
        Vector2::new(q[2 * i], q[2 * i + 1])
    }

    fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.bodies).flat_map(move |i| (i + 1..self.bodies).map(move |j| (i, j)))
    }

    pub fn min_distance(&self, q: &[f64]) -> f64 {
        self.pairs()
            .map(|(i, j)| (self.position(q, i) - self.position(q, j)).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn potential(&self, q: &[f64]) -> f64 {
        -self.pairs().map(|(i, j)| 1.0 / (self.position(q, i) - self.position(q, j)).norm()).sum::<f64>()
    }

    /// ΔU = −2 Σ 1/r_ij³ (planar).
    pub fn laplacian(&self, q: &[f64]) -> f64 {
        -2.0 * self.pairs().map(|(i, j)| (self.position(q, i) - self.position(q, j)).norm().powi(-3)).sum::<f64>()
    }

    fn potential_gradient(&self, q: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(2 * self.bodies);
        for (i, j) in self.pairs() {
            let d = self.position(q, i) - self.position(q, j);
            let f = d / d.norm().powi(3);
            for k in 0..2 {
                g[2 * i + k] += f[k];
                g[2 * j + k] -= f[k];
            }
        }
        g
    }

    fn potential_hessian(&self, q: &[f64]) -> DMatrix<f64> {
        let m = 2 * self.bodies;
        let mut h = DMatrix::zeros(m, m);
        for (i, j) in self.pairs() {
            let d = self.position(q, i) - self.position(q, j);
            let r = d.norm();
            let b: Matrix2<f64> = Matrix2::identity() / r.powi(3) - d * d.transpose() * (3.0 / r.powi(5));
            for (a, c, sign) in [(i, i, 1.0), (j, j, 1.0), (i, j, -1.0), (j, i, -1.0)] {
                for u in 0..2 {
                    for v in 0..2 {
                        h[(2 * a + u, 2 * c + v)] += sign * b[(u, v)];
                    }
                }
            }
        }
        h
    }
}

impl HamiltonianModel for NBody {
    fn name(&self) -> &str {
        "nbody"
    }

    fn dof(&self) -> usize {
        2 * self.bodies
    }

    fn energy(&self, z: &DVector<f64>) -> f64 {
        let m = self.dof();
        0.5 * z.rows(0, m).norm_squared() + self.potential(z.rows(m, m).as_slice())
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let m = self.dof();
        let mut g = DVector::zeros(2 * m);
        g.rows_mut(0, m).copy_from(&z.rows(0, m));
        g.rows_mut(m, m).copy_from(&self.potential_gradient(z.rows(m, m).as_slice()));
        g
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let m = self.dof();
        let mut h = DMatrix::zeros(2 * m, 2 * m);
        h.view_mut((0, 0), (m, m)).fill_with_identity();
        h.view_mut((m, m), (m, m)).copy_from(&self.potential_hessian(z.rows(m, m).as_slice()));
        h
    }

    fn check_domain(&self, z: &DVector<f64>) -> Result<()> {
        let m = self.dof();
        let d = self.min_distance(z.rows(m, m).as_slice());
        if d >= COLLISION_GUARD {
            Ok(())
        } else {
            Err(Error::Domain {
                model: "nbody".into(),
                detail: format!("near collision: minimum pairwise distance {d:.3e} < {COLLISION_GUARD:e}"),
            })
        }
    }

    fn curvature_form_oracle(&self, z: &DVector<f64>) -> Option<DMatrix<f64>> {
        let m = self.dof();
        Some(self.potential_hessian(z.rows(m, m).as_slice()))
    }
}

/// The planar N-body model with the total angular momentum
/// g = Σ (p_{2i} q_{2i−1} − p_{2i−1} q_{2i}).
pub fn make_nbody_planar(bodies: usize) -> Result<(NBody, SharedIntegral)> {
    Ok((NBody::new(bodies)?, Arc::new(AngularMomentum::planar_bodies(bodies))))
}

/// Derived quantities of an N-body phase point.
#[derive(Debug, Clone)]
pub struct NBodyState {
    pub bodies: usize,
    pub q: DVector<f64>,
    pub p: DVector<f64>,
}

impl NBodyState {
    pub fn from_phase(bodies: usize, z: &DVector<f64>) -> Result<Self> {
        if z.len() != 4 * bodies {
            return Err(Error::Dimension(format!("{bodies}-body state needs {} entries", 4 * bodies)));
        }
        Ok(Self { bodies, p: z.rows(0, 2 * bodies).into_owned(), q: z.rows(2 * bodies, 2 * bodies).into_owned() })
    }

    pub fn phase(&self) -> DVector<f64> {
        let m = 2 * self.bodies;
        let mut z = DVector::zeros(2 * m);
        z.rows_mut(0, m).copy_from(&self.p);
        z.rows_mut(m, m).copy_from(&self.q);
        z
    }

    /// Moment of inertia I = ‖q‖².
    pub fn inertia(&self) -> f64 {
        self.q.norm_squared()
    }

    pub fn kinetic(&self) -> f64 {
        0.5 * self.p.norm_squared()
    }

    pub fn potential(&self) -> f64 {
        NBody { bodies: self.bodies }.potential(self.q.as_slice())
    }

    pub fn angular_momentum(&self) -> f64 {
        (0..self.bodies).map(|i| self.q[2 * i] * self.p[2 * i + 1] - self.q[2 * i + 1] * self.p[2 * i]).sum()
    }

    /// {H, I} = 2⟨p, q⟩.
    pub fn inertia_bracket(&self) -> f64 {
        2.0 * self.p.dot(&self.q)
    }

    /// Sundman term 2TI − ¼{H, I}² ≥ 0.
    pub fn sundman_term(&self) -> f64 {
        let b = self.inertia_bracket();
        2.0 * self.kinetic() * self.inertia() - 0.25 * b * b
    }

    fn checked_inertia(&self) -> Result<f64> {
        let i = self.inertia();
        if i > 0.0 {
            Ok(i)
        } else {
            Err(Error::Domain { model: "nbody".into(), detail: "moment of inertia is zero".into() })
        }
    }

    fn laplacian(&self) -> f64 {
        NBody { bodies: self.bodies }.laplacian(self.q.as_slice())
    }
}

/// The reduced Ricci curvature exactly as displayed in the closed form
/// ΔU − U/I + 3/I²·(2TI − ¼{H,I}²).
pub fn nbody_reduced_ricci_closed_form(state: &NBodyState) -> Result<f64> {
    let i = state.checked_inertia()?;
    Ok(state.laplacian() - state.potential() / i + 3.0 / (i * i) * state.sundman_term())
}

/// The reduced Ricci curvature obtained by carrying out the trace
/// decomposition directly: ΔU + U/I + 3/I²·(2TI − ¼{H,I}²).
///
/// The rotation direction X = (Jq, 0) has Q(X, X) = I and, U being
/// rotation invariant and homogeneous of degree −1, Hess U(Jq, Jq) = −U; the
/// removed term −r(X)/Q(X,X) is therefore +U/I.
pub fn nbody_reduced_ricci_corrected(state: &NBodyState) -> Result<f64> {
    let i = state.checked_inertia()?;
    Ok(state.laplacian() + state.potential() / i + 3.0 / (i * i) * state.sundman_term())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::audit_model;

    #[test]
    fn two_bodies_at_unit_distance() {
        let nb = NBody::new(2).unwrap();
        let q = [0.0, 0.0, 1.0, 0.0];
        assert!((nb.laplacian(&q) + 2.0).abs() < 1e-15);
        let z = DVector::from_vec(vec![0.0, 0.3, 0.0, -0.3, 0.0, 0.0, 1.0, 0.0]);
        assert!((nb.potential_hessian(&q).trace() + 2.0).abs() < 1e-14);
        assert!(audit_model(&nb, &z).passes(1e-7));
    }

    #[test]
    fn sundman_term_vanishes_for_parallel_impulses() {
        let q = DVector::from_vec(vec![1.0, 0.2, -0.4, 0.9, -0.6, -1.1]);
        let s = NBodyState { bodies: 3, p: &q * 0.37, q };
        assert!(s.sundman_term().abs() < 1e-14);
    }

    #[test]
    fn collision_guard() {
        let nb = NBody::new(2).unwrap();
        let z = DVector::from_vec(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1e-7, 0.0]);
        assert!(matches!(nb.check_domain(&z), Err(Error::Domain { .. })));
    }
}
