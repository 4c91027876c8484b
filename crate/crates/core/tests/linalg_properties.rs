use approx::assert_relative_eq;
use lagcurv::jacobi::mobius_transform;
use lagcurv::linalg::{blocks, from_blocks, j_std, sigma, svd, symplectic_defect, symplectic_inverse};
use lagcurv::symplectic::{check_lagrangian, LagrangianFrame};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-2.0f64..2.0, rows * cols).prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn symmetric(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    matrix(n, n).prop_map(|m| (&m + m.transpose()) * 0.5)
}

/// Product of a shear in q, a shear in p and a block-diagonal map: always
/// symplectic.
fn symplectic(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    (symmetric(n), symmetric(n), matrix(n, n)).prop_filter_map("singular diagonal block", move |(c, b, a)| {
        let a = a + DMatrix::identity(n, n) * 3.0;
        let a_inv_t = a.clone().try_inverse()?.transpose();
        let id = DMatrix::identity(n, n);
        let z = DMatrix::zeros(n, n);
        let lower = from_blocks(&id, &z, &(c * 0.5), &id);
        let upper = from_blocks(&id, &(b * 0.5), &z, &id);
        let diag = from_blocks(&a, &z, &z, &a_inv_t);
        Some(lower * upper * diag)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn svd_recomposes_with_orthonormal_factors(m in matrix(6, 4)) {
        let d = svd(&m);
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(d.singular_values.clone()));
        let back = &d.u * sigma * d.v.transpose();
        prop_assert!((&back - &m).amax() < 1e-12);
        prop_assert!((d.u.transpose() * &d.u - DMatrix::identity(4, 4)).amax() < 1e-12);
        prop_assert!((d.v.transpose() * &d.v - DMatrix::identity(4, 4)).amax() < 1e-12);
        prop_assert!(d.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn svd_detects_rank_of_low_rank_products(a in matrix(5, 2), b in matrix(2, 5)) {
        let m = &a * &b;
        let d = svd(&m);
        let top = d.singular_values[0].max(1.0);
        prop_assert!(d.singular_values[2..].iter().all(|s| *s < 1e-12 * top));
        let sigma = DMatrix::from_diagonal(&DVector::from_vec(d.singular_values.clone()));
        prop_assert!((&d.u * sigma * d.v.transpose() - &m).amax() < 1e-12 * top);
    }

    #[test]
    fn symplectic_maps_preserve_the_form(p in symplectic(3), u in matrix(6, 1), v in matrix(6, 1)) {
        prop_assume!(p.amax() < 1e3);
        prop_assert!(symplectic_defect(&p) < 1e-9);
        let (u, v) = (u.column(0).into_owned(), v.column(0).into_owned());
        let before = sigma(&u, &v);
        let after = sigma(&(&p * &u), &(&p * &v));
        prop_assert!((before - after).abs() < 1e-9 * (1.0 + p.amax().powi(2)));
        prop_assert!((symplectic_inverse(&p) * &p - DMatrix::identity(6, 6)).amax() < 1e-8 * p.amax().powi(2));
    }

    #[test]
    fn sigma_is_antisymmetric(u in matrix(4, 1), v in matrix(4, 1)) {
        let (u, v) = (u.column(0).into_owned(), v.column(0).into_owned());
        prop_assert!((sigma(&u, &v) + sigma(&v, &u)).abs() < 1e-14);
        prop_assert!(sigma(&u, &u).abs() < 1e-14);
    }

    #[test]
    fn graphs_of_symmetric_matrices_are_lagrangian(s in symmetric(3)) {
        let frame = LagrangianFrame::graph(&s).unwrap();
        prop_assert!(check_lagrangian(&frame).is_lagrangian);
        prop_assert!((frame.graph_matrix().unwrap() - &s).amax() < 1e-10);
    }

    #[test]
    fn mobius_transform_is_inverted_by_the_inverse_map(s in symmetric(2), p in symplectic(2)) {
        let (a, b, c, d) = blocks(&p);
        let Ok(moved) = mobius_transform(&s, &a, &b, &c, &d) else {
            return Ok(());
        };
        let (ai, bi, ci, di) = blocks(&symplectic_inverse(&p));
        let back = mobius_transform(&moved, &ai, &bi, &ci, &di).unwrap();
        prop_assert!((&back - &s).amax() < 1e-7 * (1.0 + moved.amax()) * (1.0 + p.amax()));
        prop_assert!((&moved - moved.transpose()).amax() < 1e-12);
    }
}

#[test]
fn standard_form_squares_to_minus_identity() {
    let j = j_std(3);
    assert_relative_eq!(&j * &j, -DMatrix::identity(6, 6));
    assert_relative_eq!(j.transpose(), -j);
}
