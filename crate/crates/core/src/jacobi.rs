//! Curvature of regular curves in the Lagrange Grassmannian.
//!
//! A curve is handled through a *coordinate jet*: in a Darboux chart where
//! Λ(t) = {(x, S_t x)}, the symmetric matrices S, Ṡ, S̈, S⃛ at one instant.
//! The velocity of the curve, as a quadratic form on Λ(τ), is `−Ṡ` in these
//! coordinates, so monotone increasing curves have negative definite Ṡ.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, blocks, canonical_basis, chart_rotation, checked_inverse, condition_ratio,
    orthonormal_range, sigma_mat, singular_values, sym, sym_eigenvalues, symplectic_inverse,
    vstack,
};
use crate::numdiff::matrix_jet;
use crate::symplectic::{
    adapted_darboux_basis, intersection_with_skew_complement, IsotropicTuple, LagrangianFrame,
    SymplecticSpace, RANK_TOL,
};

/// Regularity threshold on the singular-value ratio of Ṡ.
pub const REGULARITY_TOL: f64 = 1e-10;
/// Smallest acceptable x-block ratio before the chart is rotated.
const CHART_RATIO: f64 = 1e-3;

/// S and its first three derivatives at `tau`, in the chart `basis_change`
/// (chart coordinates = basis_change · ambient coordinates).
#[derive(Debug, Clone)]
pub struct CoordCurveJet {
    pub tau: f64,
    pub s: DMatrix<f64>,
    pub s1: DMatrix<f64>,
    pub s2: DMatrix<f64>,
    pub s3: DMatrix<f64>,
    pub basis_change: DMatrix<f64>,
    /// Richardson discrepancy of the finite differences (0 for exact jets).
    pub error_estimate: f64,
}

impl CoordCurveJet {
    /// Jet with symmetrised blocks; fails unless Ṡ is regular.
    pub fn new(
        tau: f64,
        s: DMatrix<f64>,
        s1: DMatrix<f64>,
        s2: DMatrix<f64>,
        s3: DMatrix<f64>,
        basis_change: DMatrix<f64>,
    ) -> Result<Self> {
        let n = s.nrows();
        for (name, m) in [("S", &s), ("S1", &s1), ("S2", &s2), ("S3", &s3)] {
            if m.shape() != (n, n) {
                return Err(Error::Dimension(format!("{name} must be {n}×{n}")));
            }
        }
        if basis_change.shape() != (2 * n, 2 * n) {
            return Err(Error::Dimension("basis change must be 2n×2n".into()));
        }
        let jet = Self {
            tau,
            s: sym(&s),
            s1: sym(&s1),
            s2: sym(&s2),
            s3: sym(&s3),
            basis_change,
            error_estimate: 0.0,
        };
        let ratio = condition_ratio(&jet.s1);
        if ratio < REGULARITY_TOL {
            return Err(Error::Regularity(format!(
                "Ṡ is singular at τ = {tau} (singular-value ratio {ratio:.3e})"
            )));
        }
        Ok(jet)
    }

    /// Jet given in the identity chart.
    pub fn in_standard_chart(
        tau: f64,
        s: DMatrix<f64>,
        s1: DMatrix<f64>,
        s2: DMatrix<f64>,
        s3: DMatrix<f64>,
    ) -> Result<Self> {
        let n = s.nrows();
        Self::new(tau, s, s1, s2, s3, DMatrix::identity(2 * n, 2 * n))
    }

    pub fn n(&self) -> usize {
        self.s.nrows()
    }

    /// Largest asymmetry among the stored blocks before symmetrisation is
    /// not recoverable; this reports the symmetry of what is stored.
    pub fn max_asymmetry(&self) -> f64 {
        [&self.s, &self.s1, &self.s2, &self.s3].iter().map(|m| asymmetry(m)).fold(0.0, f64::max)
    }

    pub fn chart_to_ambient(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        symplectic_inverse(&self.basis_change) * v
    }

    pub fn ambient_to_chart(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        &self.basis_change * v
    }

    /// Chart frame `[I; S]`.
    fn chart_frame(&self) -> DMatrix<f64> {
        vstack(&DMatrix::identity(self.n(), self.n()), &self.s)
    }

    /// Basis of Λ(τ) in ambient coordinates: images of (e_i, S e_i).
    pub fn ambient_basis(&self) -> DMatrix<f64> {
        self.chart_to_ambient(&self.chart_frame())
    }

    pub fn subspace(&self) -> Result<LagrangianFrame> {
        LagrangianFrame::new(self.ambient_basis())
    }

    /// Velocity quadratic form of the curve in the basis [`Self::ambient_basis`].
    pub fn velocity_form(&self) -> DMatrix<f64> {
        -&self.s1
    }

    /// Coefficients of ambient vectors of Λ(τ) in [`Self::ambient_basis`]
    /// (their chart x-coordinates).
    pub fn coefficients(&self, vectors: &DMatrix<f64>) -> DMatrix<f64> {
        let chart = self.ambient_to_chart(vectors);
        chart.rows(0, self.n()).into_owned()
    }
}

/// Differentiate a sampled curve of Lagrangian subspaces at `tau`.
///
/// `samples` must be 7 (spacing h) or 13 (spacing h/2, one Richardson level)
/// frames on a uniform grid centred at `tau`. If the centre frame meets the
/// chart vertical, the fixed rotation (x, y) ↦ ((x+y)/√2, (y−x)/√2) is
/// applied up to three times and the recorded `basis_change` is its power.
pub fn coordinate_jet(samples: &[(f64, LagrangianFrame)], tau: f64) -> Result<CoordCurveJet> {
    let count = samples.len();
    if count != 7 && count != 13 {
        return Err(Error::Input(format!("need 7 or 13 stencil samples, got {count}")));
    }
    let mid = count / 2;
    let spacing = (samples[count - 1].0 - samples[0].0) / (count - 1) as f64;
    if !(spacing > 0.0) {
        return Err(Error::Input("stencil times must increase".into()));
    }
    for (i, (t, _)) in samples.iter().enumerate() {
        let expected = tau + (i as f64 - mid as f64) * spacing;
        if (t - expected).abs() > 1e-9 * (1.0 + tau.abs()) {
            return Err(Error::Input(format!(
                "stencil not uniform and centred at τ = {tau}: sample {i} at {t}, expected {expected}"
            )));
        }
    }
    let n = samples[0].1.n();
    let rot = chart_rotation(n);
    let mut chart = DMatrix::identity(2 * n, 2 * n);
    let mut best: Option<(f64, DMatrix<f64>)> = None;
    for _ in 0..4 {
        let worst = samples
            .iter()
            .map(|(_, f)| condition_ratio(&(&chart * f.columns()).rows(0, n).into_owned()))
            .fold(f64::INFINITY, f64::min);
        if worst >= CHART_RATIO {
            best = Some((worst, chart.clone()));
            break;
        }
        if best.as_ref().map_or(true, |(b, _)| worst > *b) {
            best = Some((worst, chart.clone()));
        }
        chart = &rot * chart;
    }
    let (ratio, chart) = best.expect("at least one chart tried");
    if ratio < 1e-8 {
        return Err(Error::Chart(format!(
            "no rotated chart is transversal to the samples (best ratio {ratio:.3e})"
        )));
    }
    let mut values = Vec::with_capacity(count);
    for (_, f) in samples {
        let rotated = LagrangianFrame::new(&chart * f.columns())?;
        values.push(rotated.graph_matrix()?);
    }
    let mj = matrix_jet(&values, spacing).expect("stencil size checked");
    let mut jet = CoordCurveJet::new(tau, mj.value, mj.d1, mj.d2, mj.d3, chart)?;
    jet.error_estimate = mj.error_estimate;
    Ok(jet)
}

/// Curvature operator, curvature form and Ricci curvature in a basis of Λ(τ).
#[derive(Debug, Clone)]
pub struct CurvatureReport {
    pub operator: DMatrix<f64>,
    pub form: DMatrix<f64>,
    pub ricci: f64,
    /// Columns: the basis vectors (ambient or quotient coordinates) in which
    /// `operator` and `form` are written.
    pub basis: DMatrix<f64>,
}

impl CurvatureReport {
    fn coefficients(&self, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let b = &self.basis;
        let gram = b.transpose() * b;
        let ginv = checked_inverse(&gram, 1e-14, "report basis Gram matrix")?;
        let c = ginv * (b.transpose() * vectors);
        let resid = (b * &c - vectors).amax();
        if resid > 1e-7 * vectors.amax().max(1.0) {
            return Err(Error::Input(format!(
                "vectors do not lie in the curve subspace (residual {resid:.3e})"
            )));
        }
        Ok(c)
    }

    /// The curvature form evaluated on the given vectors of Λ(τ) (Gram
    /// matrix r(v_i, v_j)).
    pub fn form_on(&self, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let c = self.coefficients(vectors)?;
        Ok(sym(&(c.transpose() * &self.form * &c)))
    }

    /// Eigenvalues of the operator (real parts, ascending).
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .operator
            .clone()
            .complex_eigenvalues()
            .iter()
            .map(|c| c.re)
            .collect();
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev
    }
}

/// The matrix Schwarzian: operator ½Ṡ⁻¹S⃛ − ¾(Ṡ⁻¹S̈)², form −½S⃛ + ¾S̈Ṡ⁻¹S̈.
pub fn matrix_schwarzian(jet: &CoordCurveJet) -> Result<CurvatureReport> {
    let s1inv = checked_inverse(&jet.s1, REGULARITY_TOL, "Ṡ")?;
    let m = &s1inv * &jet.s2;
    let operator = (&s1inv * &jet.s3) * 0.5 - (&m * &m) * 0.75;
    let form = sym(&(&jet.s3 * -0.5 + (&jet.s2 * &s1inv * &jet.s2) * 0.75));
    let ricci = operator.trace();
    Ok(CurvatureReport { operator, form, ricci, basis: jet.ambient_basis() })
}

/// Matrix Möbius transformation (C + D S)(A + B S)⁻¹.
pub fn mobius_transform(
    s: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    c: &DMatrix<f64>,
    d: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    let m = a + b * s;
    let minv = checked_inverse(&m, 1e-12, "A + B·S").map_err(|_| {
        Error::Chart("new chart is not transversal to the subspace (A + B·S singular)".into())
    })?;
    Ok(sym(&((c + d * s) * minv)))
}

/// Re-express a jet in a new chart. `p` maps old chart coordinates to new
/// chart coordinates and must be symplectic.
pub fn transform_jet(jet: &CoordCurveJet, p: &DMatrix<f64>) -> Result<CoordCurveJet> {
    let (a, b, c, d) = blocks(p);
    let m0 = &a + &b * &jet.s;
    let minv = checked_inverse(&m0, 1e-12, "A + B·S")
        .map_err(|_| Error::Chart("new chart is not transversal to the curve".into()))?;
    let n0 = &c + &d * &jet.s;
    let (m1, m2, m3) = (&b * &jet.s1, &b * &jet.s2, &b * &jet.s3);
    let (n1, n2, n3) = (&d * &jet.s1, &d * &jet.s2, &d * &jet.s3);
    let t0 = &n0 * &minv;
    let t1 = (&n1 - &t0 * &m1) * &minv;
    let t2 = (&n2 - (&t1 * &m1) * 2.0 - &t0 * &m2) * &minv;
    let t3 = (&n3 - (&t2 * &m1) * 3.0 - (&t1 * &m2) * 3.0 - &t0 * &m3) * &minv;
    let mut out = CoordCurveJet::new(jet.tau, t0, t1, t2, t3, p * &jet.basis_change)?;
    out.error_estimate = jet.error_estimate;
    Ok(out)
}

fn g_matrices(jet: &CoordCurveJet) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let s1inv = checked_inverse(&jet.s1, REGULARITY_TOL, "Ṡ")?;
    let a = &s1inv * &jet.s2 * &s1inv; // Ṡ⁻¹S̈Ṡ⁻¹
    let g = &a * 0.5;
    let gdot = (&s1inv * &jet.s3 * &s1inv - (&a * &jet.s2 * &s1inv) * 2.0) * 0.5;
    Ok((sym(&g), sym(&gdot)))
}

/// Derivative subspace Λ°(τ) = {(−G y, y − S G y)}, G = ½Ṡ⁻¹S̈Ṡ⁻¹, in
/// ambient coordinates.
pub fn derivative_subspace(jet: &CoordCurveJet) -> Result<LagrangianFrame> {
    let (g, _) = g_matrices(jet)?;
    let n = jet.n();
    let top = -&g;
    let bottom = DMatrix::identity(n, n) - &jet.s * &g;
    LagrangianFrame::new(jet.chart_to_ambient(&vstack(&top, &bottom)))
}

/// Curvature operator as the composition −Λ̇° ∘ Λ̇ of the velocities of the
/// curve and of its derivative curve, with Λ* ≅ Λ° and Λ°* ≅ Λ identified
/// through v ↦ σ(v, ·). The derivative curve and its velocity are
/// obtained from the same jet (Λ° depends on S, Ṡ, S̈; its velocity on S⃛).
pub fn curvature_via_derivative_curve(jet: &CoordCurveJet) -> Result<CurvatureReport> {
    let n = jet.n();
    let (g, gdot) = g_matrices(jet)?;
    let id = DMatrix::identity(n, n);
    let l = vstack(&id, &jet.s);
    let ldot = vstack(&DMatrix::zeros(n, n), &jet.s1);
    let m = vstack(&-&g, &(&id - &jet.s * &g));
    let mdot = vstack(&-&gdot, &(-(&jet.s1 * &g) - &jet.s * &gdot));
    let q_l = sym(&sigma_mat(&ldot, &l));
    let q_m = sym(&sigma_mat(&mdot, &m));
    let p = sigma_mat(&l, &m);
    let ratio = condition_ratio(&p);
    if ratio < 1e-12 {
        return Err(Error::Transversality { which: "derivative curve".into(), ratio });
    }
    let pinv = p.try_inverse().expect("checked ratio");
    let operator = pinv.transpose() * q_m * &pinv * &q_l;
    let form = sym(&(&q_l * &operator));
    let ricci = operator.trace();
    Ok(CurvatureReport { operator, form, ricci, basis: jet.ambient_basis() })
}

/// Data of an ℓ-reduction at one instant: a_i, A, ä_i and the curvature
/// increment on K = Λ(τ) ∩ ℓ^∠.
#[derive(Debug, Clone)]
pub struct ReductionData {
    /// Orthonormal ambient basis of K (the basis of `delta_form`).
    pub k_basis: DMatrix<f64>,
    pub a_vectors: DMatrix<f64>,
    pub a_dot2: DMatrix<f64>,
    /// A_km = σ(l_k, a_m).
    pub a_matrix: DMatrix<f64>,
    pub delta_form: DMatrix<f64>,
    pub delta_operator: DMatrix<f64>,
    /// Velocity form restricted to K, in `k_basis`.
    pub velocity_on_k: DMatrix<f64>,
}

impl ReductionData {
    /// ¾ Σ (A⁻¹)_km σ(ä_k, v_i) σ(ä_m, v_j) for arbitrary vectors.
    pub fn delta_on(&self, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        delta_gram(&self.a_matrix, &self.a_dot2, vectors)
    }

    /// Smallest eigenvalue of the delta form.
    pub fn min_eigenvalue(&self) -> f64 {
        sym_eigenvalues(&self.delta_form).first().copied().unwrap_or(0.0)
    }

    /// Singular values of the delta form, descending.
    pub fn singular_values(&self) -> Vec<f64> {
        singular_values(&self.delta_form)
    }

    /// Numerical rank at relative threshold `rel`.
    pub fn rank(&self, rel: f64) -> usize {
        let sv = self.singular_values();
        match sv.first() {
            Some(&max) if max > 0.0 => sv.iter().filter(|&&x| x > rel * max).count(),
            _ => 0,
        }
    }
}

pub(crate) fn delta_gram(
    a_matrix: &DMatrix<f64>,
    a_dot2: &DMatrix<f64>,
    vectors: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    if a_matrix.nrows() == 0 {
        return Ok(DMatrix::zeros(vectors.ncols(), vectors.ncols()));
    }
    let ainv = checked_inverse(&sym(a_matrix), 1e-10, "A")
        .map_err(|_| Error::ReductionDegenerate("det A ≈ 0".into()))?;
    let w = sigma_mat(a_dot2, vectors); // s×k, σ(ä_k, v_j)
    Ok(sym(&(w.transpose() * ainv * w * 0.75)))
}

/// Orthonormal canonical basis of Λ ∩ ℓ^∠.
pub(crate) fn k_basis_of(lambda: &LagrangianFrame, ell: &IsotropicTuple) -> Result<DMatrix<f64>> {
    let (k, _) = intersection_with_skew_complement(lambda, ell)?;
    Ok(canonical_basis(&orthonormal_range(&k, RANK_TOL)))
}

/// Data of the ℓ-reduction of the curve at the jet time.
///
/// a_i(t) ∈ Λ(t) is defined by Λ̇(t)(a_i, ·) = σ(l_i, ·)|_Λ(t); in the chart
/// a = (b, S b) with b = Ṡ⁻¹(l_y − S l_x).
pub fn curve_reduction_delta(jet: &CoordCurveJet, ell: &IsotropicTuple) -> Result<ReductionData> {
    let n = jet.n();
    let s = ell.s();
    if ell.dim() != 2 * n {
        return Err(Error::Dimension("ℓ lives in a different space than the curve".into()));
    }
    let lambda = jet.subspace()?;
    let k_basis = k_basis_of(&lambda, ell)?;
    let k_coeff = jet.coefficients(&k_basis);
    let velocity_on_k = sym(&(k_coeff.transpose() * jet.velocity_form() * &k_coeff));
    if s == 0 {
        let k = k_basis.ncols();
        return Ok(ReductionData {
            k_basis,
            a_vectors: DMatrix::zeros(2 * n, 0),
            a_dot2: DMatrix::zeros(2 * n, 0),
            a_matrix: DMatrix::zeros(0, 0),
            delta_form: DMatrix::zeros(k, k),
            delta_operator: DMatrix::zeros(k, k),
            velocity_on_k,
        });
    }
    let lc = jet.ambient_to_chart(ell.vectors());
    let lx = lc.rows(0, n).into_owned();
    let ly = lc.rows(n, n).into_owned();
    let s1inv = checked_inverse(&jet.s1, REGULARITY_TOL, "Ṡ")?;
    let w = &ly - &jet.s * &lx;
    let wd = -(&jet.s1 * &lx);
    let wdd = -(&jet.s2 * &lx);
    let b = &s1inv * &w;
    let bd = &s1inv * (&wd - &jet.s2 * &b);
    let bdd = &s1inv * (&wdd - &jet.s3 * &b - (&jet.s2 * &bd) * 2.0);
    let a_chart = vstack(&b, &(&jet.s * &b));
    let add_chart = vstack(&bdd, &(&jet.s2 * &b + (&jet.s1 * &bd) * 2.0 + &jet.s * &bdd));
    let a_vectors = jet.chart_to_ambient(&a_chart);
    let a_dot2 = jet.chart_to_ambient(&add_chart);
    let a_matrix = sigma_mat(ell.vectors(), &a_vectors);
    let ratio = condition_ratio(&a_matrix);
    if ratio < 1e-10 {
        return Err(Error::ReductionDegenerate(format!(
            "det A ≈ 0 (singular-value ratio {ratio:.3e}); for monotone curves this means Λ(τ) ∩ span ℓ ≠ 0"
        )));
    }
    let delta_form = delta_gram(&a_matrix, &a_dot2, &k_basis)?;
    let delta_operator = operator_from_form(&velocity_on_k, &delta_form)?;
    Ok(ReductionData {
        k_basis,
        a_vectors,
        a_dot2,
        a_matrix: sym(&a_matrix),
        delta_form,
        delta_operator,
        velocity_on_k,
    })
}

/// Operator Q⁻¹·F matching a form F for the velocity form Q.
pub(crate) fn operator_from_form(q: &DMatrix<f64>, form: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if q.nrows() == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    Ok(checked_inverse(q, REGULARITY_TOL, "velocity form on K")? * form)
}

/// Output of [`reduce_coordinate_curve`].
#[derive(Debug, Clone)]
pub struct ReducedJet {
    /// Jet of the reduced curve ((n−s)×(n−s) blocks) in the quotient chart
    /// whose x-axis is K = Λ(τ) ∩ ℓ^∠ with basis `k_basis`.
    pub jet: CoordCurveJet,
    /// Ambient vectors forming the reduced chart's horizontal basis.
    pub k_basis: DMatrix<f64>,
    /// Adapted Darboux basis (columns E_1..E_n, F_1..F_n).
    pub adapted_basis: DMatrix<f64>,
    /// Max |off-diagonal block| of Ṡ in the adapted chart.
    pub block1_defect: f64,
    /// Max |lower-right block of Ṡ⁻¹ + A|.
    pub block2_defect: f64,
}

/// Jet of the reduced curve (Λ(t) ∩ ℓ^∠ + ℓ)/ℓ, obtained by moving to the
/// adapted Darboux basis and erasing the last s rows and columns.
pub fn reduce_coordinate_curve(
    jet: &CoordCurveJet,
    ell: &IsotropicTuple,
    reduction: &ReductionData,
) -> Result<ReducedJet> {
    let n = jet.n();
    let s = ell.s();
    let space = SymplecticSpace::new(n)?;
    let lambda = jet.subspace()?;
    let t = adapted_darboux_basis(&space, &lambda, ell, &reduction.a_vectors).map_err(|e| match e {
        Error::Normalization(msg) => Error::ReductionDegenerate(msg),
        other => other,
    })?;
    let p = symplectic_inverse(&t) * symplectic_inverse(&jet.basis_change);
    let adapted = transform_jet(jet, &p)?;
    let k = n - s;
    let off = if s > 0 && k > 0 { adapted.s1.view((0, k), (k, s)).amax() } else { 0.0 };
    let block1 = off / adapted.s1.amax().max(f64::MIN_POSITIVE);
    let block2 = if s > 0 {
        let inv = checked_inverse(&adapted.s1, REGULARITY_TOL, "Ṡ (adapted chart)")?;
        let lr = inv.view((k, k), (s, s)).into_owned();
        (lr + &reduction.a_matrix).amax() / reduction.a_matrix.amax().max(1.0)
    } else {
        0.0
    };
    let take = |m: &DMatrix<f64>| m.view((0, 0), (k, k)).into_owned();
    let mut reduced = CoordCurveJet::new(
        jet.tau,
        take(&adapted.s),
        take(&adapted.s1),
        take(&adapted.s2),
        take(&adapted.s3),
        DMatrix::identity(2 * k, 2 * k),
    )?;
    reduced.error_estimate = jet.error_estimate;
    Ok(ReducedJet {
        jet: reduced,
        k_basis: t.columns(0, k).into_owned(),
        adapted_basis: t,
        block1_defect: block1,
        block2_defect: block2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(x: f64) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, x)
    }

    #[test]
    fn schwarzian_of_tan_is_one() {
        let jet = CoordCurveJet::in_standard_chart(0.0, scalar(0.0), scalar(1.0), scalar(0.0), scalar(2.0)).unwrap();
        let rep = matrix_schwarzian(&jet).unwrap();
        assert!((rep.operator[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((rep.form[(0, 0)] + 1.0).abs() < 1e-15);
        let alt = curvature_via_derivative_curve(&jet).unwrap();
        assert!((alt.operator[(0, 0)] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn affine_curve_has_zero_curvature() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let z = DMatrix::zeros(2, 2);
        let jet = CoordCurveJet::in_standard_chart(0.0, z.clone(), a, z.clone(), z).unwrap();
        assert!(matrix_schwarzian(&jet).unwrap().operator.amax() < 1e-15);
        let ds = derivative_subspace(&jet).unwrap();
        assert!(ds.distance(&LagrangianFrame::horizontal(2)) < 1e-15);
    }

    #[test]
    fn singular_velocity_is_rejected() {
        let z = DMatrix::zeros(2, 2);
        let s1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        let err = CoordCurveJet::in_standard_chart(0.0, z.clone(), s1, z.clone(), z).unwrap_err();
        assert!(matches!(err, Error::Regularity(_)));
    }

    #[test]
    fn empty_ell_leaves_jet_unchanged() {
        let jet = CoordCurveJet::in_standard_chart(
            0.0,
            DMatrix::from_row_slice(2, 2, &[0.1, 0.2, 0.2, 0.0]),
            DMatrix::from_row_slice(2, 2, &[-1.0, 0.1, 0.1, -2.0]),
            DMatrix::from_row_slice(2, 2, &[0.3, 0.0, 0.0, 0.5]),
            DMatrix::from_row_slice(2, 2, &[1.0, 0.4, 0.4, -1.0]),
        )
        .unwrap();
        let ell = IsotropicTuple::empty(2);
        let red = curve_reduction_delta(&jet, &ell).unwrap();
        assert!(red.delta_form.amax() == 0.0);
        let rj = reduce_coordinate_curve(&jet, &ell, &red).unwrap();
        let a = matrix_schwarzian(&jet).unwrap();
        let b = matrix_schwarzian(&rj.jet).unwrap();
        let mut sa = a.spectrum();
        let mut sb = b.spectrum();
        sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
        sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in sa.iter().zip(&sb) {
            assert!((x - y).abs() < 1e-10);
        }
    }
}
