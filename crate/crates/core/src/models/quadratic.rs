use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::HamiltonianModel;
use crate::linalg::sym;

/// H(z) = ½ zᵀ M z with a constant symmetric 2n×2n matrix M.
#[derive(Debug, Clone)]
pub struct QuadraticHamiltonian {
    name: String,
    matrix: DMatrix<f64>,
}

impl QuadraticHamiltonian {
    pub fn new(name: impl Into<String>, matrix: DMatrix<f64>) -> Result<Self> {
        let (r, c) = matrix.shape();
        if r != c || r % 2 != 0 || r == 0 {
            return Err(Error::Dimension("quadratic Hamiltonian needs a square 2n×2n matrix".into()));
        }
        Ok(Self { name: name.into(), matrix: sym(&matrix) })
    }
}

impl HamiltonianModel for QuadraticHamiltonian {
    fn name(&self) -> &str {
        &self.name
    }
    fn dof(&self) -> usize {
        self.matrix.nrows() / 2
    }
    fn energy(&self, z: &DVector<f64>) -> f64 {
        0.5 * z.dot(&(&self.matrix * z))
    }
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64> {
        &self.matrix * z
    }
    fn hessian(&self, _z: &DVector<f64>) -> DMatrix<f64> {
        self.matrix.clone()
    }
}

/// H = p₁p₂: indefinite H_pp, so the vertical distribution is regular but
/// not monotone.
pub fn saddle() -> QuadraticHamiltonian {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 1)] = 1.0;
    m[(1, 0)] = 1.0;
    QuadraticHamiltonian::new("saddle", m).expect("valid shape")
}

/// H = p₁q₂ + p₂q₁, linear in the impulses: H_pp = 0.
pub fn linear_in_momentum() -> QuadraticHamiltonian {
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 3)] = 1.0;
    m[(3, 0)] = 1.0;
    m[(1, 2)] = 1.0;
    m[(2, 1)] = 1.0;
    QuadraticHamiltonian::new("linear-in-momentum", m).expect("valid shape")
}
