//! Hamiltonian flows, their linearisations and Jacobi curves.
//!
//! Phase points are `z = (p, q)`. The Hamiltonian vector field is
//! `H⃗ = (−H_q, H_p)`, so that dH(·) = σ(·, H⃗). Flow and variational
//! equations are integrated jointly as one extended system with an
//! adaptive 8(5,3) Dormand–Prince scheme; Jacobi-curve jets use a fixed
//! number of classical RK4 steps per sample so that the integration error
//! is a smooth function of the sample time and does not pollute finite
//! differences.

use std::cell::RefCell;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use ode_solvers::dop_shared::OutputType;
use ode_solvers::{Dop853, System};

use crate::error::{Error, Result};
use crate::jacobi::{coordinate_jet, CoordCurveJet};
use crate::linalg::{sigma_mat, sym, sym_eigenvalues, symplectic_defect, symplectic_inverse};
use crate::numdiff::{directional_derivative, jacobian};
use crate::symplectic::LagrangianFrame;

/// A Hamiltonian on the linear chart R^{2n} = {(p, q)}.
pub trait HamiltonianModel: Send + Sync {
    fn name(&self) -> &str;

    /// Degrees of freedom n.
    fn dof(&self) -> usize;

    fn energy(&self, z: &DVector<f64>) -> f64;

    /// (∂H/∂p, ∂H/∂q).
    fn gradient(&self, z: &DVector<f64>) -> DVector<f64>;

    /// Full 2n×2n Hessian; defaults to Richardson central differences of the
    /// gradient (base step 1e-3, four levels).
    fn hessian(&self, z: &DVector<f64>) -> DMatrix<f64> {
        sym(&jacobian(|w| self.gradient(w), z, 1e-3))
    }

    /// Domain guard (chart boundaries, collisions).
    fn check_domain(&self, _z: &DVector<f64>) -> Result<()> {
        Ok(())
    }

    /// Closed-form curvature form of the vertical distribution in the basis
    /// ∂p_1..∂p_n, when known.
    fn curvature_form_oracle(&self, _z: &DVector<f64>) -> Option<DMatrix<f64>> {
        None
    }
}

pub type SharedModel = Arc<dyn HamiltonianModel>;

/// H⃗(z) = (−H_q, H_p).
pub fn hamiltonian_field(model: &dyn HamiltonianModel, z: &DVector<f64>) -> DVector<f64> {
    let n = model.dof();
    let g = model.gradient(z);
    let mut f = DVector::zeros(2 * n);
    f.rows_mut(0, n).copy_from(&(-g.rows(n, n)));
    f.rows_mut(n, n).copy_from(&g.rows(0, n));
    f
}

/// Derivative of H⃗: [[−H_qp, −H_qq], [H_pp, H_pq]].
pub fn field_jacobian(model: &dyn HamiltonianModel, z: &DVector<f64>) -> DMatrix<f64> {
    let n = model.dof();
    let h = model.hessian(z);
    let mut a = DMatrix::zeros(2 * n, 2 * n);
    a.view_mut((0, 0), (n, 2 * n)).copy_from(&(-h.view((n, 0), (n, 2 * n))));
    a.view_mut((n, 0), (n, 2 * n)).copy_from(&h.view((0, 0), (n, 2 * n)));
    a
}

/// H_pp block.
pub fn hpp(model: &dyn HamiltonianModel, z: &DVector<f64>) -> DMatrix<f64> {
    let n = model.dof();
    model.hessian(z).view((0, 0), (n, n)).into_owned()
}

/// Finite-difference audit of a model's derivatives at a point.
#[derive(Debug, Clone, Copy)]
pub struct ModelAudit {
    /// Relative mismatch between the gradient and differences of H.
    pub gradient_defect: f64,
    /// Relative mismatch between the Hessian and differences of the gradient.
    pub hessian_defect: f64,
    pub hessian_asymmetry: f64,
}

impl ModelAudit {
    pub fn passes(&self, tol: f64) -> bool {
        self.gradient_defect <= tol && self.hessian_defect <= tol && self.hessian_asymmetry <= 1e-9
    }
}

pub fn audit_model(model: &dyn HamiltonianModel, z: &DVector<f64>) -> ModelAudit {
    let grad = model.gradient(z);
    let fd_grad = jacobian(|w| DVector::from_element(1, model.energy(w)), z, 1e-3).transpose();
    let gd = (&grad - fd_grad.column(0)).amax() / grad.amax().max(1.0);
    let hess = model.hessian(z);
    let fd_hess = jacobian(|w| model.gradient(w), z, 1e-3);
    let hd = (&hess - &fd_hess).amax() / hess.amax().max(1.0);
    ModelAudit {
        gradient_defect: gd,
        hessian_defect: hd,
        hessian_asymmetry: (&hess - hess.transpose()).amax(),
    }
}

/// Integrator tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Maximum number of steps per integration call.
    pub max_steps: u32,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-12, max_steps: 500_000 }
    }
}

impl FlowOptions {
    pub fn with_tolerance(tol: f64) -> Self {
        Self { rtol: tol, atol: tol, ..Self::default() }
    }
}

struct ExtendedSystem<'a> {
    model: &'a dyn HamiltonianModel,
    n: usize,
    variational: bool,
    failure: &'a RefCell<Option<Error>>,
}

impl ExtendedSystem<'_> {
    fn rhs(&self, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let m = 2 * self.n;
        let z = y.rows(0, m).into_owned();
        dy.rows_mut(0, m).copy_from(&hamiltonian_field(self.model, &z));
        if self.variational {
            let a = field_jacobian(self.model, &z);
            let phi = DMatrix::from_column_slice(m, m, y.rows(m, m * m).as_slice());
            let dphi = a * phi;
            dy.rows_mut(m, m * m).copy_from_slice(dphi.as_slice());
        }
    }
}

impl System<f64, DVector<f64>> for ExtendedSystem<'_> {
    fn system(&self, _t: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        self.rhs(y, dy);
    }

    fn solout(&mut self, _t: f64, y: &DVector<f64>, _dy: &DVector<f64>) -> bool {
        let z = y.rows(0, 2 * self.n).into_owned();
        if !z.iter().all(|x| x.is_finite()) {
            *self.failure.borrow_mut() = Some(Error::Input("non-finite state".into()));
            return true;
        }
        match self.model.check_domain(&z) {
            Ok(()) => false,
            Err(e) => {
                *self.failure.borrow_mut() = Some(e);
                true
            }
        }
    }
}

fn integration_error(t: f64, detail: impl Into<String>) -> Error {
    Error::Integration { module: "hamiltonian_flow", t, detail: detail.into() }
}

/// Integrate the (optionally extended) system from `t0` to `t1`.
fn integrate_segment(
    model: &dyn HamiltonianModel,
    y0: &DVector<f64>,
    t0: f64,
    t1: f64,
    variational: bool,
    opts: &FlowOptions,
) -> Result<DVector<f64>> {
    if t0 == t1 {
        return Ok(y0.clone());
    }
    let failure = RefCell::new(None);
    let sys = ExtendedSystem { model, n: model.dof(), variational, failure: &failure };
    let mut solver = Dop853::from_param(
        sys,
        t0,
        t1,
        t1 - t0,
        y0.clone(),
        opts.rtol,
        opts.atol,
        0.9,
        0.0,
        0.333,
        6.0,
        (t1 - t0).abs(),
        0.0,
        opts.max_steps,
        1000,
        OutputType::Sparse,
    );
    let res = solver.integrate();
    let failed = failure.borrow_mut().take();
    if let Some(err) = failed {
        let last = solver.x_out().last().copied().unwrap_or(t0);
        return Err(match err {
            Error::Domain { model, detail } => {
                integration_error(last, format!("{model}: {detail} (last good time {last:.12e})"))
            }
            other => integration_error(last, other.to_string()),
        });
    }
    if let Err(e) = res {
        let last = solver.x_out().last().copied().unwrap_or(t0);
        return Err(integration_error(last, format!("{e} (last good time {last:.12e})")));
    }
    let t_end = *solver.x_out().last().expect("solver produced output");
    if (t_end - t1).abs() > 1e-9 * (1.0 + t1.abs()) {
        return Err(integration_error(t_end, "integration stopped before the end of the window"));
    }
    let y = solver.y_out().last().expect("solver produced output").clone();
    if !y.iter().all(|x| x.is_finite()) {
        return Err(integration_error(t1, "non-finite state"));
    }
    Ok(y)
}

/// Flow state together with its linearisation.
#[derive(Debug, Clone)]
pub struct FlowPoint {
    pub t: f64,
    pub z: DVector<f64>,
    pub phi: DMatrix<f64>,
}

fn pack(z: &DVector<f64>, phi: &DMatrix<f64>) -> DVector<f64> {
    let m = z.len();
    let mut y = DVector::zeros(m + m * m);
    y.rows_mut(0, m).copy_from(z);
    y.rows_mut(m, m * m).copy_from_slice(phi.as_slice());
    y
}

fn unpack(t: f64, y: &DVector<f64>, m: usize) -> FlowPoint {
    FlowPoint {
        t,
        z: y.rows(0, m).into_owned(),
        phi: DMatrix::from_column_slice(m, m, y.rows(m, m * m).as_slice()),
    }
}

/// Advance a flow point (state and fundamental matrix) to time `t`.
pub fn advance(model: &dyn HamiltonianModel, from: &FlowPoint, t: f64, opts: &FlowOptions) -> Result<FlowPoint> {
    let m = from.z.len();
    let y = integrate_segment(model, &pack(&from.z, &from.phi), from.t, t, true, opts)?;
    Ok(unpack(t, &y, m))
}

/// Flow point at t = 0 with Φ = I.
pub fn start_point(model: &dyn HamiltonianModel, lambda0: &DVector<f64>) -> Result<FlowPoint> {
    let m = 2 * model.dof();
    if lambda0.len() != m {
        return Err(Error::Dimension(format!(
            "{} expects a {m}-dimensional state, got {}",
            model.name(),
            lambda0.len()
        )));
    }
    model.check_domain(lambda0)?;
    Ok(FlowPoint { t: 0.0, z: lambda0.clone(), phi: DMatrix::identity(m, m) })
}

/// States on a time grid with the energy-drift diagnostic.
///
/// Intermediate states are recovered by [`Trajectory::state_at`], which
/// re-integrates from the nearest stored grid state; this plays the role of
/// dense output at full integrator accuracy.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub energy_drift: f64,
    pub initial_energy: f64,
    opts: FlowOptions,
}

impl Trajectory {
    pub fn state_at(&self, model: &dyn HamiltonianModel, t: f64) -> Result<DVector<f64>> {
        let idx = match self.times.binary_search_by(|x| x.partial_cmp(&t).expect("finite times")) {
            Ok(i) => return Ok(self.states[i].clone()),
            Err(0) => 0,
            Err(i) => i - 1,
        };
        integrate_segment(model, &self.states[idx], self.times[idx], t, false, &self.opts)
    }

    /// Whether |H(t) − H(0)| ≤ 1e-9 (1 + |H(0)|) over the grid.
    pub fn energy_ok(&self) -> bool {
        self.energy_drift <= 1e-9 * (1.0 + self.initial_energy.abs())
    }
}

/// Integrate ṗ = −H_q, q̇ = H_p on the given increasing grid (starting at
/// the first grid time with state `lambda0`).
pub fn integrate_flow(
    model: &dyn HamiltonianModel,
    lambda0: &DVector<f64>,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<Trajectory> {
    if grid.is_empty() {
        return Err(Error::Input("empty time grid".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("time grid must be strictly increasing".into()));
    }
    if lambda0.len() != 2 * model.dof() {
        return Err(Error::Dimension("initial state has the wrong length".into()));
    }
    model.check_domain(lambda0)?;
    let h0 = model.energy(lambda0);
    let mut states = vec![lambda0.clone()];
    let mut drift: f64 = 0.0;
    for w in grid.windows(2) {
        let next = integrate_segment(model, states.last().expect("non-empty"), w[0], w[1], false, opts)?;
        drift = drift.max((model.energy(&next) - h0).abs());
        states.push(next);
    }
    Ok(Trajectory { times: grid.to_vec(), states, energy_drift: drift, initial_energy: h0, opts: *opts })
}

/// Uniform grid of `points` times on [t0, t1].
pub fn uniform_grid(t0: f64, t1: f64, points: usize) -> Vec<f64> {
    let k = points.max(2) - 1;
    (0..=k).map(|i| t0 + (t1 - t0) * i as f64 / k as f64).collect()
}

/// Fundamental solutions along a trajectory.
#[derive(Debug, Clone)]
pub struct LinearizedFlow {
    pub times: Vec<f64>,
    pub matrices: Vec<DMatrix<f64>>,
    /// Max symplecticity defect over the grid.
    pub symplectic_defect: f64,
}

/// Integrate the variational equation δ̇ = DH⃗(γ(t)) δ jointly with the flow
/// along the trajectory's grid.
pub fn linearized_flow(model: &dyn HamiltonianModel, trajectory: &Trajectory) -> Result<LinearizedFlow> {
    let opts = trajectory.opts;
    let mut point = FlowPoint {
        t: trajectory.times[0],
        z: trajectory.states[0].clone(),
        phi: DMatrix::identity(2 * model.dof(), 2 * model.dof()),
    };
    let mut matrices = vec![point.phi.clone()];
    let mut defect: f64 = 0.0;
    for &t in &trajectory.times[1..] {
        point = advance(model, &point, t, &opts)?;
        defect = defect.max(symplectic_defect(&point.phi));
        matrices.push(point.phi.clone());
    }
    Ok(LinearizedFlow { times: trajectory.times.clone(), matrices, symplectic_defect: defect })
}

/// A field of Lagrangian subspaces on phase space.
pub trait DistributionField: Send + Sync {
    /// A 2n×n frame of D_z (not necessarily orthonormal).
    fn frame_at(&self, z: &DVector<f64>) -> Result<DMatrix<f64>>;
}

/// The vertical distribution (tangent spaces to the fibres): frame [I; 0].
#[derive(Debug, Clone, Copy)]
pub struct VerticalDistribution {
    pub n: usize,
}

impl DistributionField for VerticalDistribution {
    fn frame_at(&self, _z: &DVector<f64>) -> Result<DMatrix<f64>> {
        Ok(LagrangianFrame::vertical(self.n).into_columns())
    }
}

/// J(t) = Φ(t)⁻¹ D_{γ(t)} at a flow point.
pub fn jacobi_frame_at(field: &dyn DistributionField, point: &FlowPoint) -> Result<LagrangianFrame> {
    let frame = field.frame_at(&point.z)?;
    LagrangianFrame::new(symplectic_inverse(&point.phi) * frame)
}

/// Jacobi-curve frames on an increasing time grid starting at t ≥ 0.
pub fn jacobi_frames(
    model: &dyn HamiltonianModel,
    lambda0: &DVector<f64>,
    field: &dyn DistributionField,
    grid: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<(f64, LagrangianFrame)>> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Input("time grid must be strictly increasing".into()));
    }
    let mut point = start_point(model, lambda0)?;
    let mut out = Vec::with_capacity(grid.len());
    for &t in grid {
        point = advance(model, &point, t, opts)?;
        out.push((t, jacobi_frame_at(field, &point)?));
    }
    Ok(out)
}

/// Fixed-step RK4 for the extended system (used for smooth-in-t samples).
fn rk4_extended(model: &dyn HamiltonianModel, z0: &DVector<f64>, t: f64, steps: usize) -> Result<FlowPoint> {
    let m = z0.len();
    let failure = RefCell::new(None);
    let sys = ExtendedSystem { model, n: model.dof(), variational: true, failure: &failure };
    let mut y = pack(z0, &DMatrix::identity(m, m));
    let h = t / steps as f64;
    let mut k1 = DVector::zeros(y.len());
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    for _ in 0..steps {
        sys.rhs(&y, &mut k1);
        sys.rhs(&(&y + &k1 * (0.5 * h)), &mut k2);
        sys.rhs(&(&y + &k2 * (0.5 * h)), &mut k3);
        sys.rhs(&(&y + &k3 * h), &mut k4);
        y += (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
    }
    let point = unpack(t, &y, m);
    model.check_domain(&point.z).map_err(|e| integration_error(t, e.to_string()))?;
    Ok(point)
}

/// Options of Jacobi-curve jets.
#[derive(Debug, Clone, Copy)]
pub struct JetOptions {
    /// Stencil step h (the 13 samples are spaced h/2).
    pub step: f64,
    /// RK4 steps per sample.
    pub substeps: usize,
}

impl Default for JetOptions {
    fn default() -> Self {
        Self { step: 1e-2, substeps: 48 }
    }
}

/// Flow points at the 13 stencil times k·h/2, k = −6..=6, around λ.
pub fn stencil_points(model: &dyn HamiltonianModel, lambda: &DVector<f64>, opts: &JetOptions) -> Result<Vec<FlowPoint>> {
    model.check_domain(lambda)?;
    let m = lambda.len();
    (-6i32..=6)
        .map(|k| {
            if k == 0 {
                Ok(FlowPoint { t: 0.0, z: lambda.clone(), phi: DMatrix::identity(m, m) })
            } else {
                rk4_extended(model, lambda, k as f64 * opts.step / 2.0, opts.substeps)
            }
        })
        .collect()
}

/// Jet at τ = 0 of the Jacobi curve J_λ(t) = Φ(t)⁻¹ D_{γ(t)}.
pub fn jacobi_jet(
    model: &dyn HamiltonianModel,
    lambda: &DVector<f64>,
    field: &dyn DistributionField,
    opts: &JetOptions,
) -> Result<CoordCurveJet> {
    let pts = stencil_points(model, lambda, opts)?;
    let samples = pts
        .iter()
        .map(|p| Ok((p.t, jacobi_frame_at(field, p)?)))
        .collect::<Result<Vec<_>>>()?;
    coordinate_jet(&samples, 0.0)
}

/// The form Q_λ(v, w) = σ([H⃗, V], W) on D_λ, in the basis of the frame
/// columns of `field` at λ. Directional derivatives of the frame field are
/// taken by Richardson differences along H⃗ (exact zero for constant fields).
pub fn q_form(model: &dyn HamiltonianModel, lambda: &DVector<f64>, field: &dyn DistributionField) -> Result<DMatrix<f64>> {
    let frame = field.frame_at(lambda)?;
    let a = field_jacobian(model, lambda);
    let hf = hamiltonian_field(model, lambda);
    let n = model.dof();
    let mut dframe = DMatrix::zeros(2 * n, n);
    let probe = field.frame_at(&(lambda + &hf * 1e-7))?;
    if (&probe - &frame).amax() > 0.0 {
        for i in 0..n {
            let col = directional_derivative(
                |w| field.frame_at(w).map(|f| f.column(i).into_owned()).unwrap_or_else(|_| frame.column(i).into_owned()),
                lambda,
                &hf,
                1e-3,
            );
            dframe.set_column(i, &col);
        }
    }
    let bracket = dframe - a * &frame;
    Ok(sym(&sigma_mat(&bracket, &frame)))
}

/// Monotonicity classes of a dynamical Lagrangian distribution at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Monotonicity {
    /// Q nondegenerate and indefinite.
    Regular,
    MonotoneIncreasing,
    MonotoneDecreasing,
    Degenerate,
}

impl Monotonicity {
    pub fn label(&self) -> &'static str {
        match self {
            Monotonicity::Regular => "regular",
            Monotonicity::MonotoneIncreasing => "monotone-increasing",
            Monotonicity::MonotoneDecreasing => "monotone-decreasing",
            Monotonicity::Degenerate => "degenerate",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MonotonicityReport {
    pub class: Monotonicity,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Smallest |eigenvalue| of Q.
    pub margin: f64,
}

/// Classify by the spectrum of Q with margin 1e-9.
pub fn classify_monotonicity(
    model: &dyn HamiltonianModel,
    lambda: &DVector<f64>,
    field: &dyn DistributionField,
) -> Result<MonotonicityReport> {
    let q = q_form(model, lambda, field)?;
    Ok(classify_form(&q))
}

pub fn classify_form(q: &DMatrix<f64>) -> MonotonicityReport {
    const MARGIN: f64 = 1e-9;
    let ev = sym_eigenvalues(q);
    let min = ev.first().copied().unwrap_or(0.0);
    let max = ev.last().copied().unwrap_or(0.0);
    let margin = ev.iter().map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    let class = if margin <= MARGIN {
        Monotonicity::Degenerate
    } else if min > 0.0 {
        Monotonicity::MonotoneIncreasing
    } else if max < 0.0 {
        Monotonicity::MonotoneDecreasing
    } else {
        Monotonicity::Regular
    };
    MonotonicityReport { class, min_eigenvalue: min, max_eigenvalue: max, margin }
}
