//! Seeded random instances for the property suites: curve jets, symplectic
//! chart changes, polynomial potentials and rotationally symmetric systems
//! with involutive integrals.
//!
//! Every generator takes the RNG explicitly; [`rng`] builds the ChaCha
//! stream used throughout so that a seed reproduces a suite exactly.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::flow::SharedModel;
use crate::jacobi::CoordCurveJet;
use crate::linalg::{from_blocks, sym};
use crate::models::{AngularMomentum, Energy, Momentum, NaturalSystem, PolynomialPotential, SharedIntegral};
use crate::reduction::{reduced_distribution_frame, x_fields_and_upsilon, IntegralTuple};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vector(rng: &mut impl Rng, len: usize, half_width: f64) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.gen_range(-half_width..half_width))
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, half_width: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.gen_range(-half_width..half_width))
}

pub fn random_symmetric(rng: &mut impl Rng, n: usize, half_width: f64) -> DMatrix<f64> {
    sym(&random_matrix(rng, n, n, half_width))
}

/// Random orthogonal matrix (QR of a random square matrix).
pub fn random_orthogonal(rng: &mut impl Rng, n: usize) -> DMatrix<f64> {
    loop {
        let m = random_matrix(rng, n, n, 1.0);
        if m.determinant().abs() > 1e-3 {
            return m.qr().q();
        }
    }
}

/// Symmetric matrix with eigenvalues drawn from `lo..hi` (possibly with
/// random signs).
pub fn random_with_spectrum(rng: &mut impl Rng, n: usize, lo: f64, hi: f64, signed: bool) -> DMatrix<f64> {
    let o = random_orthogonal(rng, n);
    let d = DVector::from_fn(n, |_, _| {
        let v = rng.gen_range(lo..hi);
        if signed && rng.gen_bool(0.5) {
            -v
        } else {
            v
        }
    });
    sym(&(&o * DMatrix::from_diagonal(&d) * o.transpose()))
}

/// Random regular jet in the standard chart. With `monotone` the velocity
/// form −Ṡ is positive definite; otherwise Ṡ is merely well conditioned.
pub fn random_regular_jet(rng: &mut impl Rng, n: usize, monotone: bool) -> Result<CoordCurveJet> {
    let s = random_symmetric(rng, n, 1.0);
    let s1 = -random_with_spectrum(rng, n, 0.5, 2.0, !monotone);
    let s2 = random_symmetric(rng, n, 1.0);
    let s3 = random_symmetric(rng, n, 1.0);
    CoordCurveJet::in_standard_chart(rng.gen_range(-1.0..1.0), s, s1, s2, s3)
}

/// Random symplectic matrix: a product of shears [[I,0],[A,I]], [[I,B],[0,I]]
/// and a block-diagonal [[G,0],[0,G⁻ᵀ]], entries of size `scale`.
pub fn random_symplectic(rng: &mut impl Rng, n: usize, scale: f64) -> DMatrix<f64> {
    let id = DMatrix::identity(n, n);
    let zero = DMatrix::zeros(n, n);
    let a = random_symmetric(rng, n, scale);
    let b = random_symmetric(rng, n, scale);
    let g = loop {
        let g = &id + random_matrix(rng, n, n, scale);
        if g.determinant().abs() > 0.1 {
            break g;
        }
    };
    let ginv_t = g.clone().try_inverse().expect("checked determinant").transpose();
    let lower = from_blocks(&id, &zero, &a, &id);
    let upper = from_blocks(&id, &b, &zero, &id);
    let diag = from_blocks(&g, &zero, &zero, &ginv_t);
    lower * upper * diag
}

/// Random polynomial potential of degree ≤ 4 in n variables.
pub fn random_polynomial_potential(rng: &mut impl Rng, n: usize) -> PolynomialPotential {
    let mut u = PolynomialPotential::zero(n);
    let terms = rng.gen_range(3..=8);
    for _ in 0..terms {
        let degree = rng.gen_range(1..=4u32);
        let mut e = vec![0u32; n];
        for _ in 0..degree {
            e[rng.gen_range(0..n)] += 1;
        }
        u.add_term(e, rng.gen_range(-1.0..1.0));
    }
    u
}

/// Families of rotationally symmetric systems with involutive integrals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymmetryKind {
    /// L₁₂ (s = 1).
    Rotation,
    /// L₁₂ and H (s = 2).
    RotationEnergy,
    /// L₁₂ and p_n, potential independent of q_n (s = 2).
    RotationMomentum,
    /// L₁₂ and L₃₄ (s = 2, n ≥ 4).
    TwoRotations,
}

impl SymmetryKind {
    pub fn s(&self) -> usize {
        match self {
            SymmetryKind::Rotation => 1,
            _ => 2,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            SymmetryKind::Rotation => "L12",
            SymmetryKind::RotationEnergy => "L12+H",
            SymmetryKind::RotationMomentum => "L12+p_n",
            SymmetryKind::TwoRotations => "L12+L34",
        }
    }
}

#[derive(Clone)]
pub struct SymmetricInstance {
    pub kind: SymmetryKind,
    pub potential: PolynomialPotential,
    pub model: SharedModel,
    pub integrals: IntegralTuple,
    pub lambda0: DVector<f64>,
}

impl std::fmt::Debug for SymmetricInstance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SymmetricInstance")
            .field("kind", &self.kind)
            .field("potential", &self.potential.to_string())
            .field("lambda0", &self.lambda0.as_slice())
            .finish()
    }
}

/// Confining potential invariant under rotations of the given coordinate
/// pairs; coordinates in `free` do not appear.
fn symmetric_potential(rng: &mut impl Rng, n: usize, pairs: &[(usize, usize)], free: &[usize]) -> PolynomialPotential {
    let mut u = PolynomialPotential::zero(n);
    let none = vec![0u32; n];
    let paired: Vec<usize> = pairs.iter().flat_map(|&(i, j)| [i, j]).collect();
    for &(i, j) in pairs {
        u.add_radial_power(i, j, 1, &none, rng.gen_range(0.5..2.0));
        u.add_radial_power(i, j, 2, &none, rng.gen_range(0.0..0.5));
    }
    let singles: Vec<usize> = (0..n).filter(|k| !paired.contains(k) && !free.contains(k)).collect();
    for &k in &singles {
        let mut e = none.clone();
        e[k] = 2;
        u.add_term(e.clone(), rng.gen_range(0.5..2.0));
        e[k] = 4;
        u.add_term(e, rng.gen_range(0.0..0.3));
    }
    // Non-negative couplings keep the potential confining.
    for &(i, j) in pairs {
        for &k in &singles {
            let mut e = none.clone();
            e[k] = 2;
            u.add_radial_power(i, j, 1, &e, rng.gen_range(0.0..0.3));
        }
    }
    if pairs.len() >= 2 {
        let (i, j) = pairs[1];
        let c = rng.gen_range(0.0..0.3);
        for k in [i, j] {
            let mut e = none.clone();
            e[k] = 2;
            u.add_radial_power(pairs[0].0, pairs[0].1, 1, &e, c);
        }
    }
    u
}

/// A random natural system with the integrals of `kind` and a random
/// initial state at which the reduction is nondegenerate.
pub fn random_symmetric_instance(rng: &mut impl Rng, n: usize, kind: SymmetryKind) -> Result<SymmetricInstance> {
    let min_n = match kind {
        SymmetryKind::Rotation | SymmetryKind::RotationEnergy => 2,
        SymmetryKind::RotationMomentum => 3,
        SymmetryKind::TwoRotations => 4,
    };
    if n < min_n {
        return Err(Error::Input(format!("{} needs n ≥ {min_n}", kind.label())));
    }
    let (pairs, free): (Vec<(usize, usize)>, Vec<usize>) = match kind {
        SymmetryKind::TwoRotations => (vec![(0, 1), (2, 3)], vec![]),
        SymmetryKind::RotationMomentum => (vec![(0, 1)], vec![n - 1]),
        _ => (vec![(0, 1)], vec![]),
    };
    let potential = symmetric_potential(rng, n, &pairs, &free);
    let model: SharedModel = Arc::new(NaturalSystem::new(format!("symmetric-{}", kind.label()), potential.clone()));
    let rot: SharedIntegral = Arc::new(AngularMomentum::new(n, vec![(0, 1)]));
    let list: Vec<SharedIntegral> = match kind {
        SymmetryKind::Rotation => vec![rot],
        SymmetryKind::RotationEnergy => vec![rot, Arc::new(Energy::new(model.clone()))],
        SymmetryKind::RotationMomentum => vec![rot, Arc::new(Momentum::new(format!("p{n}"), n, n - 1))],
        SymmetryKind::TwoRotations => vec![rot, Arc::new(AngularMomentum::new(n, vec![(2, 3)]))],
    };
    let integrals = IntegralTuple::new(n, list)?;
    for _ in 0..100 {
        let lambda0 = uniform_vector(rng, 2 * n, 1.0);
        let ok = x_fields_and_upsilon(model.as_ref(), &integrals, &lambda0).is_ok()
            && reduced_distribution_frame(model.as_ref(), &integrals, &lambda0)
                .map(|f| f.intersection_dim == 0)
                .unwrap_or(false);
        if ok {
            return Ok(SymmetricInstance { kind, potential, model, integrals, lambda0 });
        }
    }
    Err(Error::ReductionDegenerate("no nondegenerate initial state found".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symplectic_defect;
    use crate::reduction::check_involution;

    #[test]
    fn symplectic_generator_is_symplectic() {
        let mut r = rng(1);
        for n in 1..4 {
            assert!(symplectic_defect(&random_symplectic(&mut r, n, 0.5)) < 1e-12);
        }
    }

    #[test]
    fn symmetric_instances_are_in_involution() {
        let mut r = rng(2);
        for (n, kind) in [
            (2, SymmetryKind::Rotation),
            (3, SymmetryKind::RotationEnergy),
            (3, SymmetryKind::RotationMomentum),
            (4, SymmetryKind::TwoRotations),
        ] {
            let inst = random_symmetric_instance(&mut r, n, kind).unwrap();
            let samples: Vec<_> = (0..12).map(|_| uniform_vector(&mut r, 2 * n, 1.5)).collect();
            let rep = check_involution(inst.model.as_ref(), &inst.integrals, &samples).unwrap();
            assert!(rep.passed, "{kind:?}: {rep:?}");
        }
    }

    #[test]
    fn seeds_reproduce() {
        let a = random_regular_jet(&mut rng(7), 3, false).unwrap();
        let b = random_regular_jet(&mut rng(7), 3, false).unwrap();
        assert_eq!(a.s3, b.s3);
    }
}
