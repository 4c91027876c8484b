use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::HamiltonianModel;
use crate::numdiff::jacobian;

/// A potential energy U(q) on R^n with analytic derivatives.
pub trait Potential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, q: &DVector<f64>) -> f64;
    fn gradient(&self, q: &DVector<f64>) -> DVector<f64>;
    fn hessian(&self, q: &DVector<f64>) -> DMatrix<f64>;
}

/// Polynomial potential Σ c_α q^α, stored as exponent vectors → coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPotential {
    n: usize,
    terms: BTreeMap<Vec<u32>, f64>,
}

impl PolynomialPotential {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    /// ½ Σ ω_i² q_i².
    pub fn quadratic(weights: &[f64]) -> Self {
        let mut u = Self::zero(weights.len());
        for (i, w) in weights.iter().enumerate() {
            let mut e = vec![0; weights.len()];
            e[i] = 2;
            u.add_term(e, 0.5 * w);
        }
        u
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<Vec<u32>, f64> {
        &self.terms
    }

    /// Add c·q^α (merging with an existing monomial).
    pub fn add_term(&mut self, exponents: Vec<u32>, coefficient: f64) {
        assert_eq!(exponents.len(), self.n, "exponent vector length");
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(exponents).or_insert(0.0);
        *entry += coefficient;
    }

    /// Add c·(q_i² + q_j²)^k, expanded binomially.
    pub fn add_radial_power(&mut self, i: usize, j: usize, k: u32, other: &[u32], coefficient: f64) {
        let mut binom = 1.0;
        for m in 0..=k {
            let mut e = other.to_vec();
            e[i] += 2 * m;
            e[j] += 2 * (k - m);
            self.add_term(e, coefficient * binom);
            binom = binom * (k - m) as f64 / (m + 1) as f64;
        }
    }

    fn monomial(q: &DVector<f64>, e: &[u32], skip: &[usize]) -> f64 {
        let mut v = 1.0;
        let mut e = e.to_vec();
        for &s in skip {
            if e[s] == 0 {
                return 0.0;
            }
            v *= e[s] as f64;
            e[s] -= 1;
        }
        for (x, &k) in q.iter().zip(&e) {
            v *= x.powi(k as i32);
        }
        v
    }
}

impl fmt::Display for PolynomialPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    write!(f, "·q{}^{}", i + 1, k)?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl Potential for PolynomialPotential {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, q: &DVector<f64>) -> f64 {
        self.terms.iter().map(|(e, c)| c * Self::monomial(q, e, &[])).sum()
    }

    fn gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.n, |i, _| self.terms.iter().map(|(e, c)| c * Self::monomial(q, e, &[i])).sum())
    }

    fn hessian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for j in i..self.n {
                let v: f64 = self.terms.iter().map(|(e, c)| c * Self::monomial(q, e, &[i, j])).sum();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }
}

type ScalarFn = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type MatrixFn = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Potential given by user evaluators.
pub struct FnPotential {
    n: usize,
    value: ScalarFn,
    gradient: VectorFn,
    hessian: MatrixFn,
}

impl Potential for FnPotential {
    fn dim(&self) -> usize {
        self.n
    }
    fn value(&self, q: &DVector<f64>) -> f64 {
        (self.value)(q)
    }
    fn gradient(&self, q: &DVector<f64>) -> DVector<f64> {
        (self.gradient)(q)
    }
    fn hessian(&self, q: &DVector<f64>) -> DMatrix<f64> {
        (self.hessian)(q)
    }
}

/// H = ½‖p‖² + U(q). The curvature form of the vertical distribution is
/// Hess U.
#[derive(Debug, Clone)]
pub struct NaturalSystem<P> {
    name: String,
    potential: P,
}

impl<P: Potential> NaturalSystem<P> {
    pub fn new(name: impl Into<String>, potential: P) -> Self {
        Self { name: name.into(), potential }
    }

    pub fn potential(&self) -> &P {
        &self.potential
    }

    /// ΔU, the Ricci curvature of the vertical distribution.
    pub fn laplacian(&self, q: &DVector<f64>) -> f64 {
        self.potential.hessian(q).trace()
    }
}

impl<P: Potential> HamiltonianModel for NaturalSystem<P> {
    fn name(&self) -> &str {
        &self.name
    }

    fn dof(&self) -> usize {
        self.potential.dim()
    }

    fn energy(&self, z: &DVector<f64>) -> f64 {
        let n = self.dof();
        0.5 * z.rows(0, n).norm_squared() + self.potential.value(&z.rows(n, n).into_owned())
    }

    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        let n = self.dof();
        let mut g = DVector::zeros(2 * n);
        g.rows_mut(0, n).copy_from(&z.rows(0, n));
        g.rows_mut(n, n).copy_from(&self.potential.gradient(&z.rows(n, n).into_owned()));
        g
    }

    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dof();
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).fill_with_identity();
        h.view_mut((n, n), (n, n)).copy_from(&self.potential.hessian(&z.rows(n, n).into_owned()));
        h
    }

    fn curvature_form_oracle(&self, z: &DVector<f64>) -> Option<DMatrix<f64>> {
        let n = self.dof();
        Some(self.potential.hessian(&z.rows(n, n).into_owned()))
    }
}

/// Build a natural system from evaluators of U, ∇U and Hess U after auditing
/// them against central differences at `probe` (relative tolerance 1e-6).
pub fn make_natural_system(
    n: usize,
    value: impl Fn(&DVector<f64>) -> f64 + Send + Sync + 'static,
    gradient: impl Fn(&DVector<f64>) -> DVector<f64> + Send + Sync + 'static,
    hessian: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
    probe: &DVector<f64>,
) -> Result<NaturalSystem<FnPotential>> {
    if probe.len() != n {
        return Err(Error::Dimension(format!("probe point must have length {n}")));
    }
    let pot = FnPotential { n, value: Box::new(value), gradient: Box::new(gradient), hessian: Box::new(hessian) };
    let g = pot.gradient(probe);
    let h = pot.hessian(probe);
    if g.len() != n || h.shape() != (n, n) {
        return Err(Error::Dimension("potential derivatives have the wrong shape".into()));
    }
    let fd_g = jacobian(|q| DVector::from_element(1, pot.value(q)), probe, 1e-3).transpose();
    let fd_h = jacobian(|q| pot.gradient(q), probe, 1e-3);
    let eg = (&g - fd_g.column(0)).amax() / g.amax().max(1.0);
    let eh = (&h - &fd_h).amax() / h.amax().max(1.0);
    if eg > 1e-6 || eh > 1e-6 || (&h - h.transpose()).amax() > 1e-9 {
        return Err(Error::Input(format!(
            "potential derivatives are inconsistent (gradient defect {eg:.2e}, Hessian defect {eh:.2e})"
        )));
    }
    Ok(NaturalSystem::new("natural", pot))
}

/// H = ½ Σ (p_i² + ω_i² q_i²).
pub fn make_oscillator(frequencies: &[f64]) -> NaturalSystem<PolynomialPotential> {
    let w2: Vec<f64> = frequencies.iter().map(|w| w * w).collect();
    NaturalSystem::new("oscillator", PolynomialPotential::quadratic(&w2))
}

/// H = ½‖p‖².
pub fn free_particle(n: usize) -> NaturalSystem<PolynomialPotential> {
    NaturalSystem::new("free", PolynomialPotential::zero(n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::audit_model;

    #[test]
    fn polynomial_derivatives_are_consistent() {
        let mut u = PolynomialPotential::zero(3);
        u.add_term(vec![2, 1, 0], 0.7);
        u.add_term(vec![0, 0, 4], -0.2);
        u.add_radial_power(0, 1, 2, &[0, 0, 1], 0.3);
        let sys = NaturalSystem::new("t", u);
        let z = DVector::from_vec(vec![0.1, -0.2, 0.3, 0.4, -0.5, 0.6]);
        assert!(audit_model(&sys, &z).passes(1e-8));
    }

    #[test]
    fn radial_power_expands_binomially() {
        let mut u = PolynomialPotential::zero(2);
        u.add_radial_power(0, 1, 3, &[0, 0], 1.0);
        let q = DVector::from_vec(vec![0.3, -1.1]);
        let r2: f64 = 0.09 + 1.21;
        assert!((u.value(&q) - r2.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn user_evaluators_are_audited() {
        let probe = DVector::from_vec(vec![0.2, 0.1]);
        let ok = make_natural_system(
            2,
            |q| q[0].powi(4) + q[1] * q[0],
            |q| DVector::from_vec(vec![4.0 * q[0].powi(3) + q[1], q[0]]),
            |q| DMatrix::from_row_slice(2, 2, &[12.0 * q[0] * q[0], 1.0, 1.0, 0.0]),
            &probe,
        );
        assert!(ok.is_ok());
        let bad = make_natural_system(
            2,
            |q| q[0].powi(4),
            |q| DVector::from_vec(vec![3.0 * q[0].powi(3), 0.0]),
            |_| DMatrix::zeros(2, 2),
            &probe,
        );
        assert!(matches!(bad, Err(Error::Input(_))));
    }
}
