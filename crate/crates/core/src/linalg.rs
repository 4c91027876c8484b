//! Small dense linear-algebra helpers on top of nalgebra.
//!
//! Phase-space vectors are laid out as `(p, q)` (impulses first), so the
//! standard form matrix is `J = [[0, I], [-I, 0]]` and
//! `σ(u, v) = uᵀ J v = ⟨u_p, v_q⟩ − ⟨v_p, u_q⟩`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// The standard 2n×2n form matrix `[[0, I], [-I, 0]]`.
pub fn j_std(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `J · m` without forming `J`: rows `(q; -p)`.
pub fn j_times(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows() / 2;
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    out.rows_mut(0, n).copy_from(&m.rows(n, n));
    out.rows_mut(n, n).copy_from(&(-m.rows(0, n)));
    out
}

/// `J · v` for a single vector.
pub fn j_times_vec(v: &DVector<f64>) -> DVector<f64> {
    let n = v.len() / 2;
    let mut out = DVector::zeros(v.len());
    out.rows_mut(0, n).copy_from(&v.rows(n, n));
    out.rows_mut(n, n).copy_from(&(-v.rows(0, n)));
    out
}

/// σ(u, v) for vectors of equal even length.
pub fn sigma(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    u.dot(&j_times_vec(v))
}

/// Matrix of pairings `aᵀ J b`, i.e. entry (i, j) is σ(a_i, b_j).
pub fn sigma_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.transpose() * j_times(b)
}

/// Inverse of a symplectic matrix, `−J Mᵀ J`.
pub fn symplectic_inverse(m: &DMatrix<f64>) -> DMatrix<f64> {
    let j = j_std(m.nrows() / 2);
    -(&j * m.transpose() * &j)
}

/// Symplecticity defect `max |Mᵀ J M − J|`.
pub fn symplectic_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows() / 2;
    let d = m.transpose() * j_times(m) - j_std(n);
    d.amax()
}

/// Symmetric part.
pub fn sym(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Largest entry of the antisymmetric part.
pub fn asymmetry(m: &DMatrix<f64>) -> f64 {
    (m - m.transpose()).amax() * 0.5
}

/// Thin singular value decomposition `m = u · diag(σ) · vᵀ`, σ descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DMatrix<f64>,
    pub singular_values: Vec<f64>,
    pub v: DMatrix<f64>,
}

impl Svd {
    /// Least-squares solution of `m x = b`, discarding singular values at
    /// or below `threshold`.
    pub fn solve(&self, b: &DVector<f64>, threshold: f64) -> DVector<f64> {
        let utb = self.u.transpose() * b;
        let scaled = DVector::from_fn(utb.len(), |i, _| {
            let s = self.singular_values[i];
            if s > threshold {
                utb[i] / s
            } else {
                0.0
            }
        });
        &self.v * scaled
    }
}

/// One-sided Jacobi SVD.
///
/// nalgebra's bidiagonal SVD can return inaccurate singular vectors when a
/// 2×2 sub-block is nearly singular (precisely the rank-deficient inputs
/// the rank decisions here are made on), so all decompositions go through
/// this routine. It is accurate to high relative precision and cheap for
/// the small matrices of this crate.
pub fn svd(m: &DMatrix<f64>) -> Svd {
    let (rows, cols) = m.shape();
    if rows < cols {
        let t = svd(&m.transpose());
        return Svd { u: t.v, singular_values: t.singular_values, v: t.u };
    }
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(cols, cols);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<(f64, usize)> = (0..cols).map(|j| (a.column(j).norm(), j)).collect();
    order.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(std::cmp::Ordering::Equal).then(x.1.cmp(&y.1)));
    let mut u = DMatrix::zeros(rows, cols);
    let mut vs = DMatrix::zeros(cols, cols);
    let mut sv = Vec::with_capacity(cols);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(cols);
    for (k, &(s, j)) in order.iter().enumerate() {
        sv.push(s);
        vs.set_column(k, &v.column(j));
        let mut col: DVector<f64> = if s > 0.0 { a.column(j) / s } else { DVector::zeros(rows) };
        for b in &basis {
            let d = b.dot(&col);
            col -= b * d;
        }
        let mut nc = col.norm();
        if nc < 0.5 {
            // Null direction: complete the orthonormal family.
            for e in 0..rows {
                let mut cand = DVector::from_fn(rows, |i, _| if i == e { 1.0 } else { 0.0 });
                for _ in 0..2 {
                    for b in &basis {
                        let d = b.dot(&cand);
                        cand -= b * d;
                    }
                }
                if cand.norm() > 0.5 {
                    col = cand;
                    nc = col.norm();
                    break;
                }
            }
        }
        col /= nc;
        u.set_column(k, &col);
        basis.push(col);
    }
    Svd { u, singular_values: sv, v: vs }
}

pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    svd(m).singular_values
}

/// Ratio smallest/largest singular value of a square matrix (0 for the
/// zero matrix).
pub fn condition_ratio(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Inverse that refuses matrices whose singular-value ratio is below `rel_tol`.
pub fn checked_inverse(m: &DMatrix<f64>, rel_tol: f64, what: &str) -> Result<DMatrix<f64>> {
    let ratio = condition_ratio(m);
    if !(ratio >= rel_tol) {
        return Err(Error::Regularity(format!(
            "{what} is singular (singular-value ratio {ratio:.3e})"
        )));
    }
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Regularity(format!("{what} could not be inverted")))
}

/// Orthonormal basis of the column space, keeping singular directions above
/// `rel_tol × σ_max`.
pub fn orthonormal_range(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    if m.ncols() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let max = singular_values(m).first().copied().unwrap_or(0.0);
    if max == 0.0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    orthonormal_range_above(m, rel_tol * max)
}

/// Orthonormal basis of the column space spanned by singular directions
/// with singular value above the absolute `threshold`.
pub fn orthonormal_range_above(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return DMatrix::zeros(m.nrows(), 0);
    }
    let d = svd(m);
    let k = d.singular_values.iter().filter(|&&s| s > threshold).count();
    d.u.columns(0, k).into_owned()
}

/// Exactly `k` leading left singular vectors (used when the rank is known).
pub fn leading_range(m: &DMatrix<f64>, k: usize) -> (DMatrix<f64>, Vec<f64>) {
    let d = svd(m);
    let mut out = DMatrix::zeros(m.nrows(), k);
    for c in 0..k.min(d.u.ncols()) {
        out.set_column(c, &d.u.column(c));
    }
    (out, d.singular_values)
}

/// Orthonormal basis of the null space of `m` (columns span {x : m x = 0}),
/// with rank decided at `rel_tol × σ_max`. The basis is canonicalised with
/// [`canonical_basis`] so that it is a deterministic function of the span.
pub fn null_space(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let row_space = orthonormal_range(&m.transpose(), rel_tol);
    canonical_basis(&orthogonal_complement(&row_space))
}

/// Null space with the rank decided by an absolute singular-value
/// threshold (for matrices whose scale is known, e.g. pairings of
/// orthonormal families, where "numerically zero" must not be rescaled).
pub fn null_space_above(m: &DMatrix<f64>, threshold: f64) -> DMatrix<f64> {
    let ncols = m.ncols();
    if m.nrows() == 0 {
        return DMatrix::identity(ncols, ncols);
    }
    let row_space = orthonormal_range_above(&m.transpose(), threshold);
    canonical_basis(&orthogonal_complement(&row_space))
}

/// Orthonormal basis of the orthogonal complement of the span of the
/// orthonormal columns `q` (pivoted Gram–Schmidt on the standard basis).
pub fn orthogonal_complement(q: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = q.nrows();
    let k = dim - q.ncols().min(dim);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let residual = |e: &DVector<f64>, basis: &[DVector<f64>]| {
        let mut r = e.clone();
        for _ in 0..2 {
            r -= q * (q.transpose() * &r);
            for b in basis {
                let c = b.dot(&r);
                r -= b * c;
            }
        }
        r
    };
    for _ in 0..k {
        let mut best: Option<(f64, DVector<f64>)> = None;
        for j in 0..dim {
            let e = DVector::from_fn(dim, |i, _| if i == j { 1.0 } else { 0.0 });
            let r = residual(&e, &basis);
            let nr = r.norm();
            if best.as_ref().map_or(true, |(b, _)| nr > *b + 1e-14) {
                best = Some((nr, r));
            }
        }
        let (nr, r) = best.expect("non-empty ambient space");
        basis.push(r / nr);
    }
    DMatrix::from_columns(&basis)
}

/// Deterministic orthonormal basis of span(q) for orthonormal `q`: the
/// projections of the standard basis vectors onto the span are
/// Gram–Schmidt-orthonormalised with pivoting on the largest residual.
/// Subspaces aligned with coordinate axes get the coordinate vectors back.
pub fn canonical_basis(q: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = q.nrows();
    let k = q.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(k);
    let projections: Vec<DVector<f64>> = (0..dim)
        .map(|j| {
            let e = DVector::from_fn(dim, |i, _| if i == j { 1.0 } else { 0.0 });
            q * (q.transpose() * e)
        })
        .collect();
    for _ in 0..k {
        let mut best: Option<(f64, usize, DVector<f64>)> = None;
        for (j, p) in projections.iter().enumerate() {
            let mut r = p.clone();
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r -= b * c;
                }
            }
            let nr = r.norm();
            if best.as_ref().map_or(true, |(b, _, _)| nr > *b + 1e-12) {
                best = Some((nr, j, r));
            }
        }
        let (nr, _, r) = best.expect("non-empty ambient space");
        let mut v = r / nr;
        // Re-project onto span(q) to remove drift from the pivoting.
        v = q * (q.transpose() * &v);
        let nv = v.norm();
        basis.push(v / nv);
    }
    if basis.is_empty() {
        return DMatrix::zeros(dim, 0);
    }
    DMatrix::from_columns(&basis)
}

/// Orthonormalise the columns of a full-rank frame (thin QR with a sign
/// convention making the diagonal of R positive).
pub fn orthonormalize(m: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = m.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols().min(r.nrows()) {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    q
}

/// Symplectic rotation `(x, y) ↦ ((x + y)/√2, (y − x)/√2)`.
pub fn chart_rotation(n: usize) -> DMatrix<f64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        r[(i, i)] = h;
        r[(i, n + i)] = h;
        r[(n + i, i)] = -h;
        r[(n + i, n + i)] = h;
    }
    r
}

/// Split a 2n×2n matrix into its four n×n blocks.
pub fn blocks(m: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = m.nrows() / 2;
    (
        m.view((0, 0), (n, n)).into_owned(),
        m.view((0, n), (n, n)).into_owned(),
        m.view((n, 0), (n, n)).into_owned(),
        m.view((n, n), (n, n)).into_owned(),
    )
}

/// Assemble a 2n×2n matrix from blocks.
pub fn from_blocks(
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> DMatrix<f64> {
    let n = a.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(b);
    m.view_mut((n, 0), (n, n)).copy_from(c);
    m.view_mut((n, n), (n, n)).copy_from(d);
    m
}

/// Stack two n×k blocks vertically into a 2n×k frame.
pub fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    m.rows_mut(0, top.nrows()).copy_from(top);
    m.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    m
}

/// Eigenvalues of a symmetric matrix in ascending order.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = sym(m).symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Relative max-entry difference `max|a − b| / max(1, max|b|)`.
pub fn rel_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).amax() / b.amax().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squares_to_minus_identity() {
        let j = j_std(3);
        assert_eq!(&j * &j, -DMatrix::<f64>::identity(6, 6));
        let m = DMatrix::from_fn(6, 2, |i, j| (i * 7 + j * 3) as f64 - 4.0);
        assert_eq!(j_times(&m), &j * &m);
    }

    #[test]
    fn sigma_matches_darboux_pairing() {
        let v = DVector::from_vec(vec![1.0, 0.0]);
        let w = DVector::from_vec(vec![0.0, 1.0]);
        assert_eq!(sigma(&v, &w), 1.0);
        assert_eq!(sigma(&w, &v), -1.0);
    }

    #[test]
    fn svd_handles_nearly_rank_one_blocks() {
        // Input on which a bidiagonal 2×2 solver returns wrong vectors.
        let m = DMatrix::from_column_slice(
            2,
            2,
            &[-0.42359358240347655, 0.005758470472840699, -0.9057503548526027, 0.012313068211725203],
        );
        let d = svd(&m);
        let recon = &d.u * DMatrix::from_diagonal(&DVector::from_vec(d.singular_values.clone())) * d.v.transpose();
        assert!((recon - &m).amax() < 1e-14);
        assert!((d.u.transpose() * &d.u - DMatrix::<f64>::identity(2, 2)).amax() < 1e-14);
        assert!(d.singular_values[1] < 1e-15);
    }

    #[test]
    fn svd_of_wide_and_zero_matrices() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let d = svd(&m);
        let recon = &d.u * DMatrix::from_diagonal(&DVector::from_vec(d.singular_values.clone())) * d.v.transpose();
        assert!((recon - &m).amax() < 1e-13);
        let z = svd(&DMatrix::zeros(3, 2));
        assert_eq!(z.singular_values, vec![0.0, 0.0]);
        assert!((z.u.transpose() * &z.u - DMatrix::<f64>::identity(2, 2)).amax() < 1e-15);
    }

    #[test]
    fn rotation_is_symplectic() {
        assert!(symplectic_defect(&chart_rotation(3)) < 1e-15);
        let r = chart_rotation(2);
        let inv = symplectic_inverse(&r);
        assert!((&r * inv - DMatrix::<f64>::identity(4, 4)).amax() < 1e-15);
    }

    #[test]
    fn null_space_and_canonical_basis() {
        let m = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 2.0]);
        let ns = null_space(&m, 1e-12);
        assert_eq!(ns.ncols(), 2);
        assert!((ns.column(0) - DVector::from_vec(vec![1.0, 0.0, 0.0])).norm() < 1e-14);
        assert!((ns.column(1) - DVector::from_vec(vec![0.0, 1.0, 0.0])).norm() < 1e-14);
        let comp = orthogonal_complement(&ns);
        assert_eq!(comp.ncols(), 1);
        assert!((comp[(2, 0)].abs() - 1.0).abs() < 1e-14);
    }
}
