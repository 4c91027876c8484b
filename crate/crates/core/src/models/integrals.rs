use std::sync::Arc;

use nalgebra::DVector;

use crate::flow::SharedModel;

/// A smooth function on phase space, typically a first integral.
pub trait FirstIntegral: Send + Sync {
    fn name(&self) -> &str;
    fn dof(&self) -> usize;
    fn value(&self, z: &DVector<f64>) -> f64;
    /// (∂g/∂p, ∂g/∂q).
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64>;

    /// g⃗ = (−g_q, g_p).
    fn hamiltonian_field(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dof();
        let g = self.gradient(z);
        let mut f = DVector::zeros(2 * n);
        f.rows_mut(0, n).copy_from(&(-g.rows(n, n)));
        f.rows_mut(n, n).copy_from(&g.rows(0, n));
        f
    }
}

pub type SharedIntegral = Arc<dyn FirstIntegral>;

/// Sum of planar angular momenta Σ (q_x p_y − q_y p_x) over coordinate
/// pairs (x, y).
#[derive(Debug, Clone)]
pub struct AngularMomentum {
    n: usize,
    pairs: Vec<(usize, usize)>,
}

impl AngularMomentum {
    pub fn new(n: usize, pairs: Vec<(usize, usize)>) -> Self {
        assert!(pairs.iter().all(|&(a, b)| a < n && b < n && a != b), "invalid coordinate pair");
        Self { n, pairs }
    }

    /// Total angular momentum of N planar bodies, coordinates (x₁, y₁, x₂, …).
    pub fn planar_bodies(bodies: usize) -> Self {
        Self::new(2 * bodies, (0..bodies).map(|i| (2 * i, 2 * i + 1)).collect())
    }
}

impl FirstIntegral for AngularMomentum {
    fn name(&self) -> &str {
        "angular_momentum"
    }
    fn dof(&self) -> usize {
        self.n
    }
    fn value(&self, z: &DVector<f64>) -> f64 {
        let (p, q) = (z.rows(0, self.n), z.rows(self.n, self.n));
        self.pairs.iter().map(|&(x, y)| q[x] * p[y] - q[y] * p[x]).sum()
    }
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let mut g = DVector::zeros(2 * n);
        for &(x, y) in &self.pairs {
            g[y] += z[n + x];
            g[x] -= z[n + y];
            g[n + x] += z[y];
            g[n + y] -= z[x];
        }
        g
    }
}

/// A single impulse p_k.
#[derive(Debug, Clone)]
pub struct Momentum {
    name: String,
    n: usize,
    index: usize,
}

impl Momentum {
    pub fn new(name: impl Into<String>, n: usize, index: usize) -> Self {
        assert!(index < n, "impulse index out of range");
        Self { name: name.into(), n, index }
    }
}

impl FirstIntegral for Momentum {
    fn name(&self) -> &str {
        &self.name
    }
    fn dof(&self) -> usize {
        self.n
    }
    fn value(&self, z: &DVector<f64>) -> f64 {
        z[self.index]
    }
    fn gradient(&self, _z: &DVector<f64>) -> DVector<f64> {
        let mut g = DVector::zeros(2 * self.n);
        g[self.index] = 1.0;
        g
    }
}

/// The Hamiltonian itself as an integral.
#[derive(Clone)]
pub struct Energy {
    model: SharedModel,
}

impl Energy {
    pub fn new(model: SharedModel) -> Self {
        Self { model }
    }
}

impl FirstIntegral for Energy {
    fn name(&self) -> &str {
        "energy"
    }
    fn dof(&self) -> usize {
        self.model.dof()
    }
    fn value(&self, z: &DVector<f64>) -> f64 {
        self.model.energy(z)
    }
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        self.model.gradient(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numdiff::jacobian;

    #[test]
    fn angular_momentum_gradient_matches_differences() {
        let l = AngularMomentum::new(3, vec![(0, 1)]);
        let z = DVector::from_vec(vec![0.3, -0.1, 0.7, 1.2, 0.4, -0.8]);
        let fd = jacobian(|w| DVector::from_element(1, l.value(w)), &z, 1e-2).transpose();
        assert!((l.gradient(&z) - fd.column(0)).amax() < 1e-12);
    }
}
