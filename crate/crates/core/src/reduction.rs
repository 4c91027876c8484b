//! Reduction of dynamical Lagrangian distributions by involutive first
//! integrals g_1..g_s.
//!
//! The reduced distribution is D^G = (∩ ker dg_i) ∩ D + span(g⃗_i). For the
//! vertical distribution of a cotangent model the auxiliary fields are
//! X_i = (−H_pp⁻¹ ∂g_i/∂p, 0), characterised by [H⃗, X_i] − g⃗_i ∈ D, and
//! Υ_km = σ(g⃗_k, X_m) = ⟨∂g_k/∂p, H_pp⁻¹ ∂g_m/∂p⟩. The curvature increment
//! of the reduction is
//!
//! δ(v) = ¾ Σ (Υ⁻¹)_km σ([H⃗,[H⃗,X_k]], v) σ([H⃗,[H⃗,X_m]], v)
//!
//! on (∩ ker dg_i) ∩ D. Lie brackets use [V, W] = DW·V − DV·W and are
//! evaluated with nested Richardson differences of the analytic fields.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::{
    field_jacobian, hamiltonian_field, hpp, jacobi_frame_at, jacobi_jet, stencil_points, DistributionField,
    HamiltonianModel, JetOptions, VerticalDistribution,
};
use crate::jacobi::{
    coordinate_jet, curve_reduction_delta, delta_gram, k_basis_of, matrix_schwarzian, operator_from_form,
    CoordCurveJet, CurvatureReport, ReductionData,
};
use crate::linalg::{
    checked_inverse, condition_ratio, orthonormal_range, orthonormalize, sigma_mat, sym, sym_eigenvalues,
};
use crate::models::SharedIntegral;
use crate::numdiff::directional_derivative;
use crate::symplectic::{IsotropicQuotient, IsotropicTuple, LagrangianFrame, RANK_TOL};

/// Condition-number ceiling for Υ (beyond it the reduction is refused).
pub const UPSILON_CONDITION_LIMIT: f64 = 1e10;
/// Displacement used by the nested bracket differences.
pub const BRACKET_DISPLACEMENT: f64 = 1e-2;

/// A tuple of first integrals on the same phase space.
#[derive(Clone)]
pub struct IntegralTuple {
    n: usize,
    integrals: Vec<SharedIntegral>,
}

impl std::fmt::Debug for IntegralTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("IntegralTuple")
            .field("n", &self.n)
            .field("integrals", &self.integrals.iter().map(|g| g.name().to_string()).collect::<Vec<_>>())
            .finish()
    }
}

impl IntegralTuple {
    pub fn new(n: usize, integrals: Vec<SharedIntegral>) -> Result<Self> {
        if integrals.len() > n {
            return Err(Error::Input(format!("at most {n} independent integrals in involution, got {}", integrals.len())));
        }
        if let Some(g) = integrals.iter().find(|g| g.dof() != n) {
            return Err(Error::Dimension(format!("integral `{}` has {} degrees of freedom, expected {n}", g.name(), g.dof())));
        }
        Ok(Self { n, integrals })
    }

    pub fn empty(n: usize) -> Self {
        Self { n, integrals: Vec::new() }
    }

    pub fn single(n: usize, g: SharedIntegral) -> Result<Self> {
        Self::new(n, vec![g])
    }

    pub fn s(&self) -> usize {
        self.integrals.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn integrals(&self) -> &[SharedIntegral] {
        &self.integrals
    }

    pub fn names(&self) -> Vec<String> {
        self.integrals.iter().map(|g| g.name().to_string()).collect()
    }

    pub fn values(&self, z: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.s(), self.integrals.iter().map(|g| g.value(z)))
    }

    /// Gradients as columns (2n×s).
    pub fn gradients(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.integrals.iter().map(|g| g.gradient(z)).collect();
        if cols.is_empty() {
            DMatrix::zeros(2 * self.n, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// Hamiltonian fields g⃗_i as columns (2n×s).
    pub fn fields(&self, z: &DVector<f64>) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.integrals.iter().map(|g| g.hamiltonian_field(z)).collect();
        if cols.is_empty() {
            DMatrix::zeros(2 * self.n, 0)
        } else {
            DMatrix::from_columns(&cols)
        }
    }

    /// ℓ = (g⃗_1(λ), …, g⃗_s(λ)).
    pub fn ell_at(&self, z: &DVector<f64>) -> Result<IsotropicTuple> {
        IsotropicTuple::new(self.fields(z))
    }
}

/// {f, g} = f_p·g_q − f_q·g_p, from the two gradients.
pub fn poisson_bracket(df: &DVector<f64>, dg: &DVector<f64>) -> f64 {
    let n = df.len() / 2;
    df.rows(0, n).dot(&dg.rows(n, n)) - df.rows(n, n).dot(&dg.rows(0, n))
}

#[derive(Debug, Clone)]
pub struct InvolutionReport {
    pub samples: usize,
    /// max over samples and i of |{H, g_i}| / scale.
    pub max_hamiltonian_bracket: f64,
    /// max over samples and i < j of |{g_i, g_j}| / scale.
    pub max_mutual_bracket: f64,
    pub passed: bool,
    /// (integral name, sample index, raw bracket) of the worst offender.
    pub worst: Option<(String, usize, f64)>,
}

/// Verify {H, g_i} = 0 and {g_i, g_j} = 0 at the sample points (relative to
/// max(1, ‖∇f‖‖∇g‖), threshold 1e-8).
pub fn check_involution(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    samples: &[DVector<f64>],
) -> Result<InvolutionReport> {
    if samples.len() < 10 {
        return Err(Error::Input(format!("involution check needs at least 10 samples, got {}", samples.len())));
    }
    let mut mh: f64 = 0.0;
    let mut mm: f64 = 0.0;
    let mut worst: Option<(String, usize, f64)> = None;
    let mut worst_rel = 0.0;
    for (k, z) in samples.iter().enumerate() {
        let dh = model.gradient(z);
        let grads: Vec<DVector<f64>> = integrals.integrals.iter().map(|g| g.gradient(z)).collect();
        for (i, dg) in grads.iter().enumerate() {
            let b = poisson_bracket(&dh, dg);
            let rel = b.abs() / (dh.norm() * dg.norm()).max(1.0);
            mh = mh.max(rel);
            if rel > worst_rel {
                worst_rel = rel;
                worst = Some((format!("{{H, {}}}", integrals.integrals[i].name()), k, b));
            }
            for (j, dg2) in grads.iter().enumerate().skip(i + 1) {
                let b = poisson_bracket(dg, dg2);
                let rel = b.abs() / (dg.norm() * dg2.norm()).max(1.0);
                mm = mm.max(rel);
                if rel > worst_rel {
                    worst_rel = rel;
                    worst = Some((
                        format!("{{{}, {}}}", integrals.integrals[i].name(), integrals.integrals[j].name()),
                        k,
                        b,
                    ));
                }
            }
        }
    }
    Ok(InvolutionReport {
        samples: samples.len(),
        max_hamiltonian_bracket: mh,
        max_mutual_bracket: mm,
        passed: mh <= 1e-8 && mm <= 1e-8,
        worst,
    })
}

/// The reduced distribution D^G at one point.
#[derive(Debug, Clone)]
pub struct ReducedDistributionFrame {
    pub frame: LagrangianFrame,
    /// Orthonormal basis of (∩ ker dg_i) ∩ D_λ.
    pub kernel_part: DMatrix<f64>,
    /// The fields g⃗_i(λ).
    pub integral_part: DMatrix<f64>,
    /// dim(D_λ ∩ span g⃗_i); zero when the reduction is nondegenerate.
    pub intersection_dim: usize,
}

/// D^G_λ for an arbitrary distribution field.
pub fn reduced_frame_for(
    field: &dyn DistributionField,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
) -> Result<ReducedDistributionFrame> {
    let n = integrals.n;
    let d = orthonormalize(&field.frame_at(lambda)?);
    let fields = integrals.fields(lambda);
    if integrals.s() == 0 {
        return Ok(ReducedDistributionFrame {
            frame: LagrangianFrame::new(d.clone())?,
            kernel_part: d,
            integral_part: fields,
            intersection_dim: 0,
        });
    }
    if orthonormal_range(&fields, RANK_TOL).ncols() < integrals.s() {
        return Err(Error::Rank("the integral differentials are dependent at λ".into()));
    }
    let ell = IsotropicTuple::new(fields.clone())?;
    let (k, intersection_dim) = crate::symplectic::intersection_with_skew_complement(&LagrangianFrame::new(d)?, &ell)?;
    let kernel_part = crate::linalg::canonical_basis(&orthonormal_range(&k, RANK_TOL));
    let mut joint = DMatrix::zeros(2 * n, kernel_part.ncols() + fields.ncols());
    joint.columns_mut(0, kernel_part.ncols()).copy_from(&kernel_part);
    joint.columns_mut(kernel_part.ncols(), fields.ncols()).copy_from(&orthonormalize(&fields));
    let span = orthonormal_range(&joint, RANK_TOL);
    if span.ncols() != n {
        return Err(Error::Rank(format!("reduced distribution has dimension {} instead of {n}", span.ncols())));
    }
    Ok(ReducedDistributionFrame {
        frame: LagrangianFrame::new(span)?,
        kernel_part,
        integral_part: fields,
        intersection_dim,
    })
}

/// D^G_λ for the vertical distribution.
pub fn reduced_distribution_frame(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
) -> Result<ReducedDistributionFrame> {
    reduced_frame_for(&VerticalDistribution { n: model.dof() }, integrals, lambda)
}

/// The field λ ↦ D^G_λ.
#[derive(Clone)]
pub struct ReducedDistribution {
    pub base: Arc<dyn DistributionField>,
    pub integrals: IntegralTuple,
}

impl DistributionField for ReducedDistribution {
    fn frame_at(&self, z: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(reduced_frame_for(self.base.as_ref(), &self.integrals, z)?.frame.into_columns())
    }
}

/// X fields and Υ at one point.
#[derive(Debug, Clone)]
pub struct XFields {
    /// Columns X_i (2n×s, zero q-part).
    pub x: DMatrix<f64>,
    pub upsilon: DMatrix<f64>,
    /// Max |Υ − Υᵀ| before symmetrisation.
    pub asymmetry: f64,
}

fn x_matrix(model: &dyn HamiltonianModel, integrals: &IntegralTuple, z: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = model.dof();
    let hinv = checked_inverse(&hpp(model, z), 1e-10, "H_pp")?;
    let gp = integrals.gradients(z).rows(0, n).into_owned();
    let mut x = DMatrix::zeros(2 * n, integrals.s());
    x.rows_mut(0, n).copy_from(&(-(hinv * gp)));
    Ok(x)
}

/// X_i = (−H_pp⁻¹ ∂g_i/∂p, 0) and Υ_km = σ(g⃗_k, X_m).
pub fn x_fields_and_upsilon(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
) -> Result<XFields> {
    let x = x_matrix(model, integrals, lambda)?;
    let ups = sigma_mat(&integrals.fields(lambda), &x);
    let asymmetry = (&ups - ups.transpose()).amax();
    let upsilon = sym(&ups);
    if integrals.s() > 0 {
        let ratio = condition_ratio(&upsilon);
        if ratio < 1.0 / UPSILON_CONDITION_LIMIT {
            return Err(Error::ReductionDegenerate(format!("det Υ ≈ 0 (condition ratio {ratio:.3e})")));
        }
    }
    Ok(XFields { x, upsilon, asymmetry })
}

fn flatten(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

fn unflatten(v: &DVector<f64>, rows: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(rows, v.len() / rows.max(1), v.as_slice())
}

/// [H⃗, W](z) for a matrix of vector fields W (columns), given W itself.
fn bracket_with_h<F>(model: &dyn HamiltonianModel, w: &F, z: &DVector<f64>, displacement: f64) -> DMatrix<f64>
where
    F: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let rows = z.len();
    let hf = hamiltonian_field(model, z);
    let dw = directional_derivative(|y| flatten(&w(y)), z, &hf, displacement);
    unflatten(&dw, rows) - field_jacobian(model, z) * w(z)
}

/// [H⃗, X_i] and [H⃗, [H⃗, X_i]] at λ (columns).
pub fn x_brackets(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
    displacement: f64,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    x_matrix(model, integrals, lambda)?;
    let n2 = 2 * model.dof();
    let s = integrals.s();
    let x_at = |y: &DVector<f64>| x_matrix(model, integrals, y).unwrap_or_else(|_| DMatrix::from_element(n2, s, f64::NAN));
    let first = |y: &DVector<f64>| bracket_with_h(model, &x_at, y, displacement);
    let b1 = first(lambda);
    let b2 = bracket_with_h(model, &first, lambda, displacement);
    if !b2.iter().all(|v| v.is_finite()) {
        return Err(Error::Regularity("H_pp became singular inside the bracket stencil".into()));
    }
    Ok((b1, b2))
}

/// Data of the dynamical curvature increment at λ (vertical D).
#[derive(Debug, Clone)]
pub struct DynamicalReduction {
    pub x: XFields,
    /// [H⃗, X_i](λ).
    pub first_brackets: DMatrix<f64>,
    /// [H⃗, [H⃗, X_i]](λ).
    pub second_brackets: DMatrix<f64>,
    /// Orthonormal ambient basis of (∩ ker dg_i) ∩ D_λ.
    pub k_basis: DMatrix<f64>,
    /// Q restricted to the kernel part.
    pub q_on_k: DMatrix<f64>,
    pub delta_form: DMatrix<f64>,
    pub delta_operator: DMatrix<f64>,
    /// Distance of [H⃗, X_i] − g⃗_i from D_λ relative to ‖g⃗_i‖ (max over i).
    pub bracket_defect: f64,
    /// dim(D_λ ∩ span g⃗_i).
    pub intersection_dim: usize,
}

impl DynamicalReduction {
    pub fn delta_on(&self, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        delta_gram(&self.x.upsilon, &self.second_brackets, vectors)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        sym_eigenvalues(&self.delta_form).first().copied().unwrap_or(0.0)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        crate::linalg::singular_values(&self.delta_form)
    }
}

/// Q(v, w) = σ([H⃗, V], W) for constant fields V, W (columns of `vectors`).
pub fn q_on_vectors(model: &dyn HamiltonianModel, lambda: &DVector<f64>, vectors: &DMatrix<f64>) -> DMatrix<f64> {
    let a = field_jacobian(model, lambda);
    sym(&sigma_mat(&(-(a * vectors)), vectors))
}

/// Curvature increment of the G-reduction at λ for the vertical distribution.
pub fn dynamical_curvature_delta(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
) -> Result<DynamicalReduction> {
    let n = model.dof();
    if integrals.n() != n {
        return Err(Error::Dimension("integrals and model have different dimensions".into()));
    }
    model.check_domain(lambda)?;
    let xf = x_fields_and_upsilon(model, integrals, lambda)?;
    let vertical = LagrangianFrame::vertical(n);
    let (k_basis, intersection_dim) = if integrals.s() == 0 {
        (DMatrix::identity(2 * n, n).columns(0, n).into_owned(), 0)
    } else {
        let ell = integrals.ell_at(lambda)?;
        let (_, dim) = crate::symplectic::intersection_with_skew_complement(&vertical, &ell)?;
        (k_basis_of(&vertical, &ell)?, dim)
    };
    if intersection_dim > 0 {
        return Err(Error::ReductionDegenerate(format!(
            "D_λ ∩ span g⃗ has dimension {intersection_dim}"
        )));
    }
    let (b1, b2) = if integrals.s() == 0 {
        (DMatrix::zeros(2 * n, 0), DMatrix::zeros(2 * n, 0))
    } else {
        x_brackets(model, integrals, lambda, BRACKET_DISPLACEMENT)?
    };
    let fields = integrals.fields(lambda);
    let mut defect: f64 = 0.0;
    for i in 0..integrals.s() {
        let d = b1.column(i) - fields.column(i);
        // Vertical D: the q-part is the component outside D.
        defect = defect.max(d.rows(n, n).norm() / fields.column(i).norm().max(f64::MIN_POSITIVE));
    }
    let q_on_k = q_on_vectors(model, lambda, &k_basis);
    let delta_form = delta_gram(&xf.upsilon, &b2, &k_basis)?;
    let delta_operator = operator_from_form(&q_on_k, &delta_form)?;
    Ok(DynamicalReduction {
        x: xf,
        first_brackets: b1,
        second_brackets: b2,
        k_basis,
        q_on_k,
        delta_form,
        delta_operator,
        bracket_defect: defect,
        intersection_dim,
    })
}

/// Where the original curvature form came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormSource {
    /// The model's closed-form curvature.
    Oracle,
    /// The matrix Schwarzian of a finite-difference Jacobi-curve jet.
    Jet,
}

/// Curvature form of the vertical distribution on the impulse basis ∂p_i.
pub fn vertical_curvature_form(
    model: &dyn HamiltonianModel,
    lambda: &DVector<f64>,
    prefer_oracle: bool,
    jet_opts: &JetOptions,
) -> Result<(DMatrix<f64>, FormSource)> {
    if prefer_oracle {
        if let Some(f) = model.curvature_form_oracle(lambda) {
            return Ok((sym(&f), FormSource::Oracle));
        }
    }
    let n = model.dof();
    let jet = jacobi_jet(model, lambda, &VerticalDistribution { n }, jet_opts)?;
    let rep = matrix_schwarzian(&jet)?;
    Ok((rep.form_on(LagrangianFrame::vertical(n).columns())?, FormSource::Jet))
}

/// Reduced curvature by the dynamical decomposition.
#[derive(Debug, Clone)]
pub struct ReducedCurvature {
    pub source: FormSource,
    /// Original curvature form on ∂p (n×n) and its Ricci trace.
    pub original_form: DMatrix<f64>,
    pub original_ricci: f64,
    pub reduction: DynamicalReduction,
    /// Original form restricted to the kernel part.
    pub original_on_k: DMatrix<f64>,
    /// r_K + δ_K.
    pub reduced_form: DMatrix<f64>,
    pub reduced_operator: DMatrix<f64>,
    pub reduced_ricci: f64,
    /// tr(Q_X⁻¹ r_X): the contribution of the X directions removed from ρ.
    pub x_term: f64,
    pub delta_trace: f64,
}

fn vertical_coefficients(n: usize, vectors: &DMatrix<f64>) -> DMatrix<f64> {
    vectors.rows(0, n).into_owned()
}

pub fn reduced_curvature(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
    prefer_oracle: bool,
    jet_opts: &JetOptions,
) -> Result<ReducedCurvature> {
    let n = model.dof();
    let (form, source) = vertical_curvature_form(model, lambda, prefer_oracle, jet_opts)?;
    let q = sym(&hpp(model, lambda));
    let qinv = checked_inverse(&q, 1e-10, "Q")?;
    let original_ricci = (&qinv * &form).trace();
    let reduction = dynamical_curvature_delta(model, integrals, lambda)?;
    let kc = vertical_coefficients(n, &reduction.k_basis);
    let original_on_k = sym(&(kc.transpose() * &form * &kc));
    let reduced_form = sym(&(&original_on_k + &reduction.delta_form));
    let reduced_operator = operator_from_form(&reduction.q_on_k, &reduced_form)?;
    let reduced_ricci = reduced_operator.trace();
    let delta_trace = reduction.delta_operator.trace();
    let x_term = if integrals.s() > 0 {
        let xc = vertical_coefficients(n, &reduction.x.x);
        let qx = sym(&(xc.transpose() * &q * &xc));
        let rx = sym(&(xc.transpose() * &form * &xc));
        (checked_inverse(&qx, 1e-12, "Q on X")? * rx).trace()
    } else {
        0.0
    };
    Ok(ReducedCurvature {
        source,
        original_form: form,
        original_ricci,
        reduction,
        original_on_k,
        reduced_form,
        reduced_operator,
        reduced_ricci,
        x_term,
        delta_trace,
    })
}

/// Ricci curvature ρ and, when integrals are given, the reduced ρ computed
/// through the decomposition ρ_red = ρ − tr(Q_X⁻¹ r_X) + tr δ.
#[derive(Debug, Clone, Copy)]
pub struct RicciReport {
    pub original: f64,
    pub reduced: Option<f64>,
    pub x_term: f64,
    pub delta_trace: f64,
}

pub fn ricci_curvature(
    model: &dyn HamiltonianModel,
    lambda: &DVector<f64>,
    integrals: Option<&IntegralTuple>,
    prefer_oracle: bool,
    jet_opts: &JetOptions,
) -> Result<RicciReport> {
    match integrals {
        Some(ints) if ints.s() > 0 => {
            let rc = reduced_curvature(model, ints, lambda, prefer_oracle, jet_opts)?;
            let decomposed = rc.original_ricci - rc.x_term + rc.delta_trace;
            Ok(RicciReport {
                original: rc.original_ricci,
                reduced: Some(decomposed),
                x_term: rc.x_term,
                delta_trace: rc.delta_trace,
            })
        }
        _ => {
            let (form, _) = vertical_curvature_form(model, lambda, prefer_oracle, jet_opts)?;
            let q = sym(&hpp(model, lambda));
            let original = (checked_inverse(&q, 1e-10, "Q")? * form).trace();
            Ok(RicciReport {
                original,
                reduced: integrals.map(|_| original),
                x_term: 0.0,
                delta_trace: 0.0,
            })
        }
    }
}

/// Jet of the reduced Jacobi curve J^G(t)/ℓ, ℓ = g⃗(λ), in a quotient chart
/// adapted to D^G_λ. This is the brute-force reference for reduced
/// curvatures: finite differences of actual reduced subspaces.
#[derive(Debug, Clone)]
pub struct ReducedCurveJet {
    pub jet: CoordCurveJet,
    pub quotient: IsotropicQuotient,
    pub ell: IsotropicTuple,
}

impl ReducedCurveJet {
    /// Curvature form of the reduced curve evaluated on ambient vectors of
    /// (∩ ker dg_i) ∩ D_λ.
    pub fn form_on_ambient(&self, report: &CurvatureReport, vectors: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        report.form_on(&self.quotient.coordinates(vectors))
    }
}

pub fn reduced_jacobi_jet(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
    jet_opts: &JetOptions,
) -> Result<ReducedCurveJet> {
    let n = model.dof();
    let ell = integrals.ell_at(lambda)?;
    let field = ReducedDistribution { base: Arc::new(VerticalDistribution { n }), integrals: integrals.clone() };
    let points = stencil_points(model, lambda, jet_opts)?;
    let frames = points
        .iter()
        .map(|p| jacobi_frame_at(&field, p))
        .collect::<Result<Vec<_>>>()?;
    let centre = &frames[frames.len() / 2];
    let quotient = IsotropicQuotient::adapted_to(centre, &ell)?;
    let samples = points
        .iter()
        .zip(&frames)
        .map(|(p, f)| Ok((p.t, quotient.project(f)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ReducedCurveJet { jet: coordinate_jet(&samples, 0.0)?, quotient, ell })
}

/// Curve-level reduction data of the Jacobi-curve jet with
/// ℓ = g⃗(λ); cross-validates [`dynamical_curvature_delta`].
pub fn curve_route_delta(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda: &DVector<f64>,
    jet_opts: &JetOptions,
) -> Result<(CoordCurveJet, ReductionData)> {
    let jet = jacobi_jet(model, lambda, &VerticalDistribution { n: model.dof() }, jet_opts)?;
    let data = curve_reduction_delta(&jet, &integrals.ell_at(lambda)?)?;
    Ok((jet, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_kepler, make_oscillator, Kepler, Momentum};

    fn kepler_tuple() -> (Kepler, IntegralTuple) {
        let (k, g) = make_kepler();
        (k, IntegralTuple::single(2, g).unwrap())
    }

    #[test]
    fn kepler_x_field_and_upsilon() {
        let (k, ints) = kepler_tuple();
        let z = Kepler::state(2.0, 1.0, 0.3);
        let xf = x_fields_and_upsilon(&k, &ints, &z).unwrap();
        assert!((xf.x[(1, 0)] + 4.0).abs() < 1e-14);
        assert!((xf.upsilon[(0, 0)] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn kepler_delta_is_three_at_unit_radius() {
        let (k, ints) = kepler_tuple();
        let z = Kepler::state(1.0, 1.0, 0.0);
        let red = dynamical_curvature_delta(&k, &ints, &z).unwrap();
        let dr = DMatrix::from_column_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        let d = red.delta_on(&dr).unwrap();
        assert!((d[(0, 0)] - 3.0).abs() < 1e-8, "{}", d[(0, 0)]);
        assert!(red.bracket_defect < 1e-8);
    }

    #[test]
    fn involution_check_flags_position() {
        let osc = make_oscillator(&[0.0]);
        // g = q₁ for H = p²/2: {H, g} = p₁.
        struct Q1;
        impl crate::models::FirstIntegral for Q1 {
            fn name(&self) -> &str {
                "q1"
            }
            fn dof(&self) -> usize {
                1
            }
            fn value(&self, z: &DVector<f64>) -> f64 {
                z[1]
            }
            fn gradient(&self, _z: &DVector<f64>) -> DVector<f64> {
                DVector::from_vec(vec![0.0, 1.0])
            }
        }
        let ints = IntegralTuple::single(1, Arc::new(Q1)).unwrap();
        let samples: Vec<DVector<f64>> =
            (0..10).map(|k| DVector::from_vec(vec![0.1 * k as f64 + 0.1, 0.3])).collect();
        let rep = check_involution(&osc, &ints, &samples).unwrap();
        assert!(!rep.passed);
        let (_, idx, b) = rep.worst.unwrap();
        assert!((b - samples[idx][0]).abs() < 1e-15);
        let kep = IntegralTuple::single(2, Arc::new(Momentum::new("p_phi", 2, 1))).unwrap();
        let ks: Vec<DVector<f64>> = (0..10).map(|k| Kepler::state(1.0 + 0.1 * k as f64, 0.7, 0.2)).collect();
        assert!(check_involution(&Kepler, &kep, &ks).unwrap().passed);
    }

    #[test]
    fn kepler_reduced_frame_parts() {
        let (k, ints) = kepler_tuple();
        let z = Kepler::state(1.0, 1.0, 0.0);
        let rf = reduced_distribution_frame(&k, &ints, &z).unwrap();
        assert_eq!(rf.intersection_dim, 0);
        assert_eq!(rf.kernel_part.ncols(), 1);
        assert!((rf.kernel_part[(0, 0)].abs() - 1.0).abs() < 1e-14);
        assert!(crate::symplectic::check_lagrangian(&rf.frame).is_lagrangian);
    }
}
