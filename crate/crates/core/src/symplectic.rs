//! Linear symplectic algebra: Darboux coordinates, Lagrangian frames,
//! isotropic quotients and the affine structure on the complements of a
//! Lagrangian subspace.
//!
//! Subspaces are always carried as explicit orthonormal frames; graph
//! coordinates are derived on demand because they break down exactly at the
//! vertical tangencies that focal-point detection is looking for.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    canonical_basis, condition_ratio, j_std, j_times, null_space_above, orthonormal_range,
    orthonormalize, sigma_mat, singular_values, sym,
};

/// Isotropy tolerance used by [`check_lagrangian`] and [`IsotropicTuple`].
pub const ISOTROPY_TOL: f64 = 1e-10;
/// Transversality threshold on the singular-value ratio of pairing blocks.
pub const TRANSVERSALITY_TOL: f64 = 1e-12;
/// Relative threshold used to decide ranks of intersections.
pub const RANK_TOL: f64 = 1e-8;

/// R^{2n} with the standard Darboux form σ((x1,y1),(x2,y2)) = ⟨x1,y2⟩ − ⟨x2,y1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticSpace {
    n: usize,
    form_matrix: DMatrix<f64>,
}

impl SymplecticSpace {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("symplectic space needs n ≥ 1".into()));
        }
        Ok(Self { n, form_matrix: j_std(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn form_matrix(&self) -> &DMatrix<f64> {
        &self.form_matrix
    }
}

/// σ(v, w) = vᵀ J w.
pub fn symplectic_form(space: &SymplecticSpace, v: &DVector<f64>, w: &DVector<f64>) -> Result<f64> {
    if v.len() != space.dim() || w.len() != space.dim() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {} in a {}-dimensional symplectic space",
            v.len(),
            w.len(),
            space.dim()
        )));
    }
    Ok(v.dot(&(space.form_matrix() * w)))
}

/// An orthonormal 2n×k frame; a Lagrangian frame when k = n and the span is
/// isotropic (see [`check_lagrangian`]).
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    columns: DMatrix<f64>,
}

impl LagrangianFrame {
    /// Orthonormalises `columns` (2n×n). Fails on shape or rank problems;
    /// isotropy is *not* enforced here so that [`check_lagrangian`] remains a
    /// meaningful diagnostic. Use [`LagrangianFrame::lagrangian`] to enforce it.
    pub fn new(columns: DMatrix<f64>) -> Result<Self> {
        let (rows, cols) = columns.shape();
        if rows % 2 != 0 || rows != 2 * cols || cols == 0 {
            return Err(Error::Dimension(format!(
                "a Lagrangian frame must be 2n×n, got {rows}×{cols}"
            )));
        }
        if !columns.iter().all(|x| x.is_finite()) {
            return Err(Error::Input("frame contains non-finite entries".into()));
        }
        let sv = singular_values(&columns);
        if sv[0] == 0.0 || sv[cols - 1] < RANK_TOL * sv[0] {
            return Err(Error::Rank(format!(
                "frame columns are linearly dependent (singular-value ratio {:.3e})",
                sv[cols - 1] / sv[0].max(f64::MIN_POSITIVE)
            )));
        }
        Ok(Self { columns: orthonormalize(&columns) })
    }

    /// Like [`LagrangianFrame::new`] but also requires isotropy.
    pub fn lagrangian(columns: DMatrix<f64>) -> Result<Self> {
        let frame = Self::new(columns)?;
        let check = check_lagrangian(&frame);
        if !check.is_lagrangian {
            return Err(Error::Input(format!(
                "frame is not isotropic (defect {:.3e})",
                check.isotropy_defect
            )));
        }
        Ok(frame)
    }

    /// Vertical frame `[I; 0]`: the impulse directions, i.e. the tangent
    /// space to the fibre of T*M.
    pub fn vertical(n: usize) -> Self {
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(i, i)] = 1.0;
        }
        Self { columns: c }
    }

    /// Horizontal frame `[0; I]`.
    pub fn horizontal(n: usize) -> Self {
        let mut c = DMatrix::zeros(2 * n, n);
        for i in 0..n {
            c[(n + i, i)] = 1.0;
        }
        Self { columns: c }
    }

    /// Graph frame `[I; S]`.
    pub fn graph(s: &DMatrix<f64>) -> Result<Self> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(Error::Dimension("graph matrix must be square".into()));
        }
        let mut c = DMatrix::zeros(2 * n, n);
        c.view_mut((0, 0), (n, n)).fill_with_identity();
        c.view_mut((n, 0), (n, n)).copy_from(s);
        Self::new(c)
    }

    pub fn n(&self) -> usize {
        self.columns.ncols()
    }

    pub fn columns(&self) -> &DMatrix<f64> {
        &self.columns
    }

    pub fn into_columns(self) -> DMatrix<f64> {
        self.columns
    }

    /// First n rows (x-block).
    pub fn x_block(&self) -> DMatrix<f64> {
        self.columns.rows(0, self.n()).into_owned()
    }

    /// Last n rows (y-block).
    pub fn y_block(&self) -> DMatrix<f64> {
        self.columns.rows(self.n(), self.n()).into_owned()
    }

    /// Graph coordinates `S = Y X⁻¹` when the frame is transversal to the
    /// vertical `{(0, y)}`.
    pub fn graph_matrix(&self) -> Result<DMatrix<f64>> {
        let x = self.x_block();
        let ratio = condition_ratio(&x);
        if ratio < TRANSVERSALITY_TOL {
            return Err(Error::Chart(format!(
                "subspace meets the chart vertical (x-block ratio {ratio:.3e})"
            )));
        }
        let xinv = x.try_inverse().ok_or_else(|| Error::Chart("x-block not invertible".into()))?;
        Ok(sym(&(self.y_block() * xinv)))
    }

    /// Apply a linear map (typically symplectic) to the frame.
    pub fn transformed(&self, m: &DMatrix<f64>) -> Result<Self> {
        Self::new(m * &self.columns)
    }

    /// Distance of `v` from the span, relative to |v|.
    pub fn contains_defect(&self, v: &DVector<f64>) -> f64 {
        let proj = &self.columns * (self.columns.transpose() * v);
        (v - proj).norm() / v.norm().max(f64::MIN_POSITIVE)
    }

    /// Largest principal-angle sine between the spans of two frames.
    pub fn distance(&self, other: &LagrangianFrame) -> f64 {
        let p = &self.columns * self.columns.transpose();
        let resid = &other.columns - &p * &other.columns;
        singular_values(&resid).first().copied().unwrap_or(0.0)
    }
}

/// Result of [`check_lagrangian`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangianCheck {
    pub is_lagrangian: bool,
    pub isotropy_defect: f64,
    pub rank: usize,
}

/// Rank and isotropy diagnostic of a frame.
pub fn check_lagrangian(frame: &LagrangianFrame) -> LagrangianCheck {
    let c = frame.columns();
    let defect = sigma_mat(c, c).amax();
    let rank = orthonormal_range(c, RANK_TOL).ncols();
    LagrangianCheck {
        is_lagrangian: rank == frame.n() && defect <= ISOTROPY_TOL,
        isotropy_defect: defect,
        rank,
    }
}

/// s linearly independent, pairwise skew-orthogonal vectors ℓ = (l_1..l_s).
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicTuple {
    vectors: DMatrix<f64>,
}

impl IsotropicTuple {
    pub fn new(vectors: DMatrix<f64>) -> Result<Self> {
        let (rows, s) = vectors.shape();
        if rows % 2 != 0 || s > rows / 2 {
            return Err(Error::Dimension(format!(
                "an isotropic tuple in R^{rows} can have at most {} vectors, got {s}",
                rows / 2
            )));
        }
        if s > 0 {
            let scale = vectors.amax().powi(2).max(f64::MIN_POSITIVE);
            let defect = sigma_mat(&vectors, &vectors).amax() / scale;
            if defect > ISOTROPY_TOL {
                return Err(Error::Input(format!(
                    "vectors are not pairwise skew-orthogonal (defect {defect:.3e})"
                )));
            }
            if orthonormal_range(&vectors, RANK_TOL).ncols() < s {
                return Err(Error::Rank("isotropic vectors are linearly dependent".into()));
            }
        }
        Ok(Self { vectors })
    }

    pub fn empty(n: usize) -> Self {
        Self { vectors: DMatrix::zeros(2 * n, 0) }
    }

    pub fn s(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }
}

/// A Darboux basis of a complement of span ℓ inside ℓ^∠, realising the
/// symplectic quotient ℓ^∠/ℓ as R^{2(n−s)} with its standard form.
#[derive(Debug, Clone, PartialEq)]
pub struct IsotropicQuotient {
    ell: DMatrix<f64>,
    /// Vectors e_i with σ(e_i, l_j) = δ_ij; together with ℓ they span the
    /// symplectic complement of the quotient section.
    dual_ell: DMatrix<f64>,
    /// Section basis: quotient coordinates (x, y) correspond to Σ x_i E_i + y_i F_i.
    e: DMatrix<f64>,
    f: DMatrix<f64>,
}

impl IsotropicQuotient {
    /// Quotient whose x-axis is the image of `lambda ∩ ℓ^∠`, so that the
    /// reduced copy of `lambda` is horizontal in quotient coordinates.
    pub fn adapted_to(lambda: &LagrangianFrame, ell: &IsotropicTuple) -> Result<Self> {
        let n = lambda.n();
        let s = ell.s();
        if ell.dim() != 2 * n {
            return Err(Error::Dimension("ℓ and Λ live in different spaces".into()));
        }
        let l = ell.vectors().clone();
        let gram = l.transpose() * &l;
        let e_last = if s > 0 {
            j_times(&l) * gram.try_inverse().ok_or_else(|| Error::Rank("ℓ is degenerate".into()))?
        } else {
            DMatrix::zeros(2 * n, 0)
        };
        let proj = |v: &DMatrix<f64>| -> DMatrix<f64> {
            // Symplectic projection onto span(e_last, ℓ)^∠.
            let a = sigma_mat(v, &l); // σ(v_k, l_i)
            let b = sigma_mat(v, &e_last); // σ(v_k, e_i)
            v - &e_last * a.transpose() + &l * b.transpose()
        };
        let (k_basis, _) = intersection_with_skew_complement(lambda, ell)?;
        let pk = proj(&k_basis);
        let e = orthonormal_range(&pk, RANK_TOL);
        if e.ncols() != n - s {
            return Err(Error::Rank(format!(
                "quotient of Λ has dimension {} instead of {}",
                e.ncols(),
                n - s
            )));
        }
        let e = canonical_basis(&e);
        // Dual vectors: project −J e into the complement, then make the
        // family isotropic with an antisymmetric correction along e.
        let f0 = proj(&(-j_times(&e)));
        let m = sigma_mat(&f0, &f0);
        let mut f = &f0 + &e * (&m * 0.5);
        // Normalise duality exactly (σ(e_i, f_j) = δ_ij).
        let d = sigma_mat(&e, &f);
        let dinv = d
            .try_inverse()
            .ok_or_else(|| Error::Rank("quotient duality matrix singular".into()))?;
        f = &f * dinv;
        Ok(Self { ell: l, dual_ell: e_last, e, f })
    }

    pub fn n_reduced(&self) -> usize {
        self.e.ncols()
    }

    pub fn ell(&self) -> &DMatrix<f64> {
        &self.ell
    }

    /// Section basis `[E | F]` as a 2n×2(n−s) matrix.
    pub fn section(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.e.nrows(), 2 * self.e.ncols());
        m.columns_mut(0, self.e.ncols()).copy_from(&self.e);
        m.columns_mut(self.e.ncols(), self.f.ncols()).copy_from(&self.f);
        m
    }

    /// Quotient coordinates of vectors in ℓ^∠ (columns of `v`).
    pub fn coordinates(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        let k = self.e.ncols();
        let x = sigma_mat(v, &self.f).transpose(); // x_j = σ(v, F_j)
        let y = sigma_mat(&self.e, v); // y_j = σ(E_j, v)
        let mut out = DMatrix::zeros(2 * k, v.ncols());
        out.rows_mut(0, k).copy_from(&x);
        out.rows_mut(k, k).copy_from(&y);
        out
    }

    /// Reduced frame of `(Λ ∩ ℓ^∠ + ℓ)/ℓ` in quotient coordinates.
    pub fn project(&self, lambda: &LagrangianFrame) -> Result<LagrangianFrame> {
        let (k_basis, _) = intersection_with_skew_complement(lambda, &IsotropicTuple {
            vectors: self.ell.clone(),
        })?;
        let coords = self.coordinates(&k_basis);
        let nr = self.n_reduced();
        let (range, sv) = crate::linalg::leading_range(&coords, nr);
        if nr > 0 && sv[nr - 1] < RANK_TOL * sv[0].max(f64::MIN_POSITIVE) {
            return Err(Error::Rank(format!(
                "reduced subspace lost rank (σ_min/σ_max = {:.3e})",
                sv[nr - 1] / sv[0]
            )));
        }
        LagrangianFrame::new(range)
    }
}

/// Basis of Λ ∩ ℓ^∠ (as ambient vectors) and dim(Λ ∩ span ℓ).
pub fn intersection_with_skew_complement(
    lambda: &LagrangianFrame,
    ell: &IsotropicTuple,
) -> Result<(DMatrix<f64>, usize)> {
    let c = lambda.columns();
    if ell.s() == 0 {
        return Ok((c.clone(), 0));
    }
    // Both families orthonormal: the pairing has unit scale, so "zero" is
    // decided by an absolute threshold.
    let lnorm = orthonormalize(ell.vectors());
    let pairing = sigma_mat(&lnorm, c); // s×n
    let coeffs = null_space_above(&pairing, RANK_TOL);
    let k = c * coeffs;
    // dim(Λ ∩ span ℓ): rank deficit of [Λ | ℓ].
    let mut joint = DMatrix::zeros(c.nrows(), c.ncols() + ell.s());
    joint.columns_mut(0, c.ncols()).copy_from(c);
    joint.columns_mut(c.ncols(), ell.s()).copy_from(&lnorm);
    let rank = orthonormal_range(&joint, RANK_TOL).ncols();
    Ok((k, c.ncols() + ell.s() - rank))
}

/// Output of [`skew_complement_quotient`].
#[derive(Debug, Clone)]
pub struct QuotientFrame {
    /// Reduced Lagrangian frame in R^{2(n−s)}.
    pub frame: LagrangianFrame,
    /// The quotient chart (section and coordinate maps).
    pub quotient: IsotropicQuotient,
    /// dim(Λ ∩ ℓ^∠).
    pub dim_skew_intersection: usize,
    /// dim(Λ ∩ span ℓ).
    pub dim_ell_intersection: usize,
}

/// `(Λ ∩ ℓ^∠ + span ℓ)/span ℓ` inside `ℓ^∠/span ℓ`.
pub fn skew_complement_quotient(frame: &LagrangianFrame, ell: &IsotropicTuple) -> Result<QuotientFrame> {
    let (k, dim_ell) = intersection_with_skew_complement(frame, ell)?;
    let quotient = IsotropicQuotient::adapted_to(frame, ell)?;
    let reduced = quotient.project(frame)?;
    Ok(QuotientFrame {
        frame: reduced,
        quotient,
        dim_skew_intersection: k.ncols(),
        dim_ell_intersection: dim_ell,
    })
}

/// Linear isomorphism I_Γ : Λ* → Γ inverse to v ↦ σ(v, ·)|_Λ, with Λ* given
/// the basis dual to the columns of `base`.
fn identification(gamma: &LagrangianFrame, base: &LagrangianFrame, which: &str) -> Result<DMatrix<f64>> {
    let m = sigma_mat(gamma.columns(), base.columns()); // (i, j) = σ(γ_i, e_j)
    let ratio = condition_ratio(&m);
    if ratio < TRANSVERSALITY_TOL {
        return Err(Error::Transversality { which: which.to_string(), ratio });
    }
    let minv_t = m
        .try_inverse()
        .ok_or_else(|| Error::Transversality { which: which.to_string(), ratio })?
        .transpose();
    Ok(gamma.columns() * minv_t)
}

/// The difference Γ − Δ of two complements of Λ as a symmetric form on Λ*
/// (in the basis dual to the columns of `base`).
pub fn affine_subtract(
    space: &SymplecticSpace,
    gamma: &LagrangianFrame,
    delta: &LagrangianFrame,
    base: &LagrangianFrame,
) -> Result<DMatrix<f64>> {
    for f in [gamma, delta, base] {
        if f.columns().nrows() != space.dim() {
            return Err(Error::Dimension("frame does not live in the given space".into()));
        }
    }
    let ig = identification(gamma, base, "gamma")?;
    let id = identification(delta, base, "delta")?;
    Ok(sym(&sigma_mat(&ig, &id)))
}

/// Symplectic basis T = [E | F] adapted to (Λ, ℓ, a):
/// E_1..E_{n−s} span Λ ∩ ℓ^∠, E_{n−s+1..n} span the a_i, and F_{n−s+i} = l_i.
/// In the coordinates c = T⁻¹ v, Λ is horizontal, l_i = (0, e_{n−s+i}) and
/// a_i ∈ span of the last s horizontal vectors.
pub fn adapted_darboux_basis(
    space: &SymplecticSpace,
    lambda: &LagrangianFrame,
    ell: &IsotropicTuple,
    a_vectors: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let n = space.n();
    let s = ell.s();
    if lambda.columns().nrows() != 2 * n || ell.dim() != 2 * n || a_vectors.shape() != (2 * n, s) {
        return Err(Error::Dimension("inconsistent sizes for adapted basis".into()));
    }
    let l = ell.vectors();
    let a_mat = sigma_mat(l, a_vectors); // A_km = σ(l_k, a_m)
    if s > 0 {
        let ratio = condition_ratio(&a_mat);
        if ratio < 1e-10 {
            return Err(Error::Normalization(format!(
                "span(a) meets ℓ^∠ (det A ≈ 0, singular-value ratio {ratio:.3e})"
            )));
        }
    }
    let (k_basis, _) = intersection_with_skew_complement(lambda, ell)?;
    let k_basis = canonical_basis(&orthonormal_range(&k_basis, RANK_TOL));
    if k_basis.ncols() != n - s {
        return Err(Error::Normalization(format!(
            "Λ ∩ ℓ^∠ has dimension {} (expected {})",
            k_basis.ncols(),
            n - s
        )));
    }
    let e_last = if s > 0 {
        -(a_vectors * sym(&a_mat).try_inverse().expect("checked above"))
    } else {
        DMatrix::zeros(2 * n, 0)
    };
    let mut e = DMatrix::zeros(2 * n, n);
    e.columns_mut(0, n - s).copy_from(&k_basis);
    e.columns_mut(n - s, s).copy_from(&e_last);
    // Dual family in JΛ, then symmetric correction so that F_{n−s+i} = l_i.
    let ete = e.transpose() * &e;
    let f_prime = -(j_times(&e) * ete.try_inverse().ok_or_else(|| Error::Normalization("degenerate E".into()))?);
    let alpha = sigma_mat(l, &f_prime).transpose(); // α_{k,i} = σ(l_i, F'_k)
    let mut c = DMatrix::zeros(n, n);
    if s > 0 {
        for i in 0..s {
            for k in 0..n {
                c[(k, n - s + i)] = alpha[(k, i)];
            }
        }
        for i in 0..s {
            for k in 0..(n - s) {
                c[(n - s + i, k)] = alpha[(k, i)];
            }
        }
        let last = c.view((n - s, n - s), (s, s)).into_owned();
        c.view_mut((n - s, n - s), (s, s)).copy_from(&sym(&last));
    }
    let f = &f_prime + &e * &c;
    let mut t = DMatrix::zeros(2 * n, 2 * n);
    t.columns_mut(0, n).copy_from(&e);
    t.columns_mut(n, n).copy_from(&f);
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{sigma, symplectic_defect};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_vec(x.to_vec())
    }

    #[test]
    fn darboux_pairing_examples() {
        let sp = SymplecticSpace::new(1).unwrap();
        assert_eq!(symplectic_form(&sp, &v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(), 1.0);
        let sp2 = SymplecticSpace::new(2).unwrap();
        let a = v(&[1.0, 0.0, 0.0, 0.0]);
        let b = v(&[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(symplectic_form(&sp2, &a, &b).unwrap(), 0.0);
        assert_eq!(symplectic_form(&sp2, &a, &a).unwrap(), 0.0);
        assert!(symplectic_form(&sp2, &a, &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn lagrangian_checks() {
        assert!(check_lagrangian(&LagrangianFrame::vertical(3)).is_lagrangian);
        let s = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, -1.0]);
        assert!(check_lagrangian(&LagrangianFrame::graph(&s).unwrap()).is_lagrangian);
        let ns = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, -1.0]);
        let chk = check_lagrangian(&LagrangianFrame::graph(&ns).unwrap());
        assert!(!chk.is_lagrangian);
        assert!(chk.isotropy_defect > 0.1);
    }

    #[test]
    fn affine_subtract_scalar_example() {
        // Λ = span(1,0), Γ = span(0,1), Δ = span(1,1): I_Γ l = (0,−1),
        // I_Δ l = (−1,−1), σ = −1.
        let sp = SymplecticSpace::new(1).unwrap();
        let base = LagrangianFrame::new(DMatrix::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        let g = LagrangianFrame::new(DMatrix::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        let d = LagrangianFrame::new(DMatrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        let val = affine_subtract(&sp, &g, &d, &base).unwrap();
        assert!((val[(0, 0)] + 1.0).abs() < 1e-14);
        assert!(affine_subtract(&sp, &g, &g, &base).unwrap().amax() < 1e-15);
        let err = affine_subtract(&sp, &base, &d, &base).unwrap_err();
        assert!(matches!(err, Error::Transversality { ref which, .. } if which == "gamma"));
    }

    #[test]
    fn quotient_of_vertical_by_vertical_vector() {
        let lam = LagrangianFrame::vertical(2);
        let ell = IsotropicTuple::new(DMatrix::from_column_slice(4, 1, &[0.0, 1.0, 0.0, 0.0])).unwrap();
        let q = skew_complement_quotient(&lam, &ell).unwrap();
        assert_eq!(q.frame.columns().nrows(), 2);
        assert_eq!(q.dim_ell_intersection, 1);
        assert_eq!(q.dim_skew_intersection, 2);
        assert!(check_lagrangian(&q.frame).is_lagrangian);
    }

    #[test]
    fn kepler_quotient_is_radial_impulse() {
        // Vertical D, ℓ = ∂φ: the quotient frame is spanned by ∂p_r.
        let lam = LagrangianFrame::vertical(2);
        let ell = IsotropicTuple::new(DMatrix::from_column_slice(4, 1, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        let q = skew_complement_quotient(&lam, &ell).unwrap();
        assert_eq!(q.dim_ell_intersection, 0);
        assert_eq!(q.dim_skew_intersection, 1);
        let sec = q.quotient.section();
        let e1 = sec.column(0);
        assert!((e1[0].abs() - 1.0).abs() < 1e-14 && e1.rows(1, 3).norm() < 1e-14);
        let fr = q.frame.columns();
        assert!((fr[(0, 0)].abs() - 1.0).abs() < 1e-14 && fr[(1, 0)].abs() < 1e-14);
    }

    #[test]
    fn adapted_basis_identity_on_normal_form() {
        let n = 2;
        let sp = SymplecticSpace::new(n).unwrap();
        let lam = LagrangianFrame::vertical(n);
        let ell = IsotropicTuple::new(DMatrix::from_column_slice(4, 1, &[0.0, 0.0, 0.0, 1.0])).unwrap();
        let a = DMatrix::from_column_slice(4, 1, &[0.0, -1.0, 0.0, 0.0]);
        let t = adapted_darboux_basis(&sp, &lam, &ell, &a).unwrap();
        assert!(symplectic_defect(&t) < 1e-14);
        let id = DMatrix::<f64>::identity(4, 4);
        assert!((t.abs() - id).amax() < 1e-14);
        let bad = DMatrix::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(adapted_darboux_basis(&sp, &lam, &ell, &bad), Err(Error::Normalization(_))));
        let _ = sigma;
    }
}
