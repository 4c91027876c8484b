//! Finite-difference differentiation.
//!
//! Two tools:
//! * matrix-valued central stencils on uniform samples (7 points, optionally
//!   a second 7-point level at half spacing for one Richardson step), used
//!   for jets of Grassmannian curves;
//! * Richardson-extrapolated central differences of vector fields along a
//!   direction, used for Lie brackets and for Hessians of user models.

use nalgebra::{DMatrix, DVector};

/// Offsets −3..=3 weights (to be divided by h, h², h³ respectively).
const D1: [f64; 7] = [-1.0 / 60.0, 9.0 / 60.0, -45.0 / 60.0, 0.0, 45.0 / 60.0, -9.0 / 60.0, 1.0 / 60.0];
const D2: [f64; 7] = [
    2.0 / 180.0,
    -27.0 / 180.0,
    270.0 / 180.0,
    -490.0 / 180.0,
    270.0 / 180.0,
    -27.0 / 180.0,
    2.0 / 180.0,
];
const D3: [f64; 7] = [1.0 / 8.0, -1.0, 13.0 / 8.0, 0.0, -13.0 / 8.0, 1.0, -1.0 / 8.0];

/// Value and first three derivatives at the centre of a stencil.
#[derive(Debug, Clone)]
pub struct MatrixJet {
    pub value: DMatrix<f64>,
    pub d1: DMatrix<f64>,
    pub d2: DMatrix<f64>,
    pub d3: DMatrix<f64>,
    /// Max-entry difference between the two Richardson levels (0 when only
    /// one level is available), a truncation-error indicator.
    pub error_estimate: f64,
}

fn stencil(values: &[&DMatrix<f64>], w: &[f64; 7], scale: f64) -> DMatrix<f64> {
    let mut acc = DMatrix::zeros(values[0].nrows(), values[0].ncols());
    for (v, &c) in values.iter().zip(w.iter()) {
        if c != 0.0 {
            acc += *v * c;
        }
    }
    acc / scale
}

/// Derivatives at the centre of uniformly spaced samples.
///
/// `values` holds either 7 samples at offsets −3..=3 (spacing `h`), or 13
/// samples at offsets −6..=6 with spacing `h/2`; in the latter case the
/// 7-point formulas are evaluated on both the coarse (every other sample) and
/// fine levels and combined by one Richardson step (orders 6, 6, 4).
pub fn matrix_jet(values: &[DMatrix<f64>], spacing: f64) -> Option<MatrixJet> {
    match values.len() {
        7 => {
            let v: Vec<&DMatrix<f64>> = values.iter().collect();
            Some(MatrixJet {
                value: values[3].clone(),
                d1: stencil(&v, &D1, spacing),
                d2: stencil(&v, &D2, spacing * spacing),
                d3: stencil(&v, &D3, spacing.powi(3)),
                error_estimate: 0.0,
            })
        }
        13 => {
            let h = 2.0 * spacing;
            let coarse: Vec<&DMatrix<f64>> = (0..7).map(|k| &values[2 * k]).collect();
            let fine: Vec<&DMatrix<f64>> = (3..10).map(|k| &values[k]).collect();
            let c1 = stencil(&coarse, &D1, h);
            let c2 = stencil(&coarse, &D2, h * h);
            let c3 = stencil(&coarse, &D3, h.powi(3));
            let f1 = stencil(&fine, &D1, spacing);
            let f2 = stencil(&fine, &D2, spacing * spacing);
            let f3 = stencil(&fine, &D3, spacing.powi(3));
            let r1 = (&f1 * 64.0 - &c1) / 63.0;
            let r2 = (&f2 * 64.0 - &c2) / 63.0;
            let r3 = (&f3 * 16.0 - &c3) / 15.0;
            let err = (&r1 - &f1)
                .amax()
                .max((&r2 - &f2).amax())
                .max((&r3 - &f3).amax());
            Some(MatrixJet { value: values[6].clone(), d1: r1, d2: r2, d3: r3, error_estimate: err })
        }
        _ => None,
    }
}

/// Richardson-extrapolated central difference of a vector-valued function
/// of one real variable at 0: central differences at h, h/2, h/4, h/8
/// combined through a 4-level Richardson table (error O(h⁸)).
///
/// The procedure is deterministic and a smooth function of any parameters
/// `f` depends on, which makes it safe to nest.
pub fn richardson_derivative<F>(f: F, h: f64) -> DVector<f64>
where
    F: Fn(f64) -> DVector<f64>,
{
    const LEVELS: usize = 4;
    let mut table: Vec<DVector<f64>> = Vec::with_capacity(LEVELS);
    let mut hk = h;
    for _ in 0..LEVELS {
        table.push((f(hk) - f(-hk)) / (2.0 * hk));
        hk *= 0.5;
    }
    for j in 1..LEVELS {
        let factor = 4f64.powi(j as i32);
        for k in (j..LEVELS).rev() {
            let improved = (&table[k] * factor - &table[k - 1]) / (factor - 1.0);
            table[k] = improved;
        }
    }
    table.pop().expect("non-empty table")
}

/// Directional derivative of a vector field `g` at `z` along `dir`, with the
/// displacement |h·dir| fixed at `displacement`.
pub fn directional_derivative<G>(g: G, z: &DVector<f64>, dir: &DVector<f64>, displacement: f64) -> DVector<f64>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    let nd = dir.norm();
    if nd == 0.0 {
        return DVector::zeros(g(z).len());
    }
    let h = displacement / nd;
    richardson_derivative(|t| g(&(z + dir * t)), h)
}

/// Jacobian of `g` by columns of Richardson central differences.
pub fn jacobian<G>(g: G, z: &DVector<f64>, step: f64) -> DMatrix<f64>
where
    G: Fn(&DVector<f64>) -> DVector<f64>,
{
    let m = g(z).len();
    let mut jac = DMatrix::zeros(m, z.len());
    for j in 0..z.len() {
        let e = DVector::from_fn(z.len(), |i, _| if i == j { 1.0 } else { 0.0 });
        let col = richardson_derivative(|t| g(&(z + &e * t)), step);
        jac.set_column(j, &col);
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_are_exact_on_polynomials() {
        // f(t) = 1 + 2t + 3t² + 4t³ + 5t⁵ at 0: f' = 2, f'' = 6, f''' = 24.
        let f = |t: f64| 1.0 + 2.0 * t + 3.0 * t * t + 4.0 * t.powi(3) + 5.0 * t.powi(5);
        let h = 0.1;
        let vals7: Vec<DMatrix<f64>> = (-3..=3).map(|k| DMatrix::from_element(1, 1, f(k as f64 * h))).collect();
        let jet = matrix_jet(&vals7, h).unwrap();
        assert!((jet.d1[(0, 0)] - 2.0).abs() < 1e-11);
        assert!((jet.d2[(0, 0)] - 6.0).abs() < 1e-9);
        assert!((jet.d3[(0, 0)] - 24.0).abs() < 1e-8);
    }

    #[test]
    fn richardson_level_on_tan() {
        // tan at 0: 0, 1, 0, 2.
        let h = 0.01;
        let vals: Vec<DMatrix<f64>> =
            (-6..=6).map(|k| DMatrix::from_element(1, 1, (k as f64 * h / 2.0).tan())).collect();
        let jet = matrix_jet(&vals, h / 2.0).unwrap();
        assert!((jet.d1[(0, 0)] - 1.0).abs() < 1e-12);
        assert!(jet.d2[(0, 0)].abs() < 1e-9);
        assert!((jet.d3[(0, 0)] - 2.0).abs() < 1e-7);
    }

    #[test]
    fn richardson_derivative_of_exp() {
        let d = richardson_derivative(|t| DVector::from_vec(vec![(1.0 + t).exp()]), 0.05);
        assert!((d[0] - 1f64.exp()).abs() < 1e-12);
    }
}
