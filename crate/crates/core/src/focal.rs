//! Focal times of dynamical Lagrangian distributions and of their
//! reductions, with multiplicities.
//!
//! A Lagrangian subspace with orthonormal frame (X; Y) corresponds to the
//! unitary U = X + iY. Relative to the initial subspace with unitary U₀ the
//! eigenvalues of (U₀ᴴU)ᵀ(U₀ᴴU) are frame independent, all equal 1 at t = 0,
//! and the multiplicity of the eigenvalue 1 is the dimension of the
//! intersection with the initial subspace. Along a monotone increasing
//! Jacobi curve the eigenphases decrease strictly, so focal times are the
//! instants at which an unwrapped eigenphase reaches −2πm, m ≥ 1. Counting
//! these crossings is an integer-valued, monotone function of time, which
//! makes bisection exact: distinct nearby roots are separated and coincident
//! ones grouped, down to the time tolerance.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::{
    advance, classify_form, jacobi_frame_at, q_form, start_point, uniform_grid, DistributionField, FlowOptions,
    FlowPoint, HamiltonianModel, Monotonicity, VerticalDistribution,
};
use crate::linalg::{orthonormalize, sigma_mat, singular_values};
use crate::reduction::{x_fields_and_upsilon, IntegralTuple};

/// Largest eigenphase motion accepted between consecutive evaluations.
const MAX_PHASE_STEP: f64 = 0.5;
/// Tolerated eigenphase increase (numerical noise) before a curve is
/// declared non-monotone.
const PHASE_NOISE: f64 = 1e-7;
/// Subdivision limits of the phase tracker.
const MAX_DEPTH: usize = 60;
const MIN_STEP: f64 = 1e-12;
/// Initial eigenphases below this are intersections with the base.
const START_PHASE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FocalKind {
    Original,
    Reduced,
}

impl FocalKind {
    pub fn label(&self) -> &'static str {
        match self {
            FocalKind::Original => "original",
            FocalKind::Reduced => "reduced",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FocalRecord {
    pub time: f64,
    pub multiplicity: usize,
    pub kind: FocalKind,
    /// Largest of the `multiplicity` smallest singular values of the
    /// σ-pairing between the current and the initial subspace at the root.
    pub residual: f64,
    /// Number of pairing singular values below the rank threshold at the
    /// root (cross-check of `multiplicity`).
    pub singular_multiplicity: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct FocalOptions {
    /// Number of grid intervals on the window.
    pub grid_points: usize,
    /// Bisection tolerance in time.
    pub time_tol: f64,
    /// Singular-value threshold for the multiplicity cross-check.
    pub rank_tol: f64,
    pub flow: FlowOptions,
}

impl Default for FocalOptions {
    fn default() -> Self {
        Self { grid_points: 2000, time_tol: 1e-10, rank_tol: 1e-8, flow: FlowOptions::default() }
    }
}

/// Originals and reductions over one window.
#[derive(Debug, Clone)]
pub struct FocalScan {
    pub window: (f64, f64),
    pub s: usize,
    pub originals: Vec<FocalRecord>,
    pub reduceds: Vec<FocalRecord>,
    /// A root lies within the time tolerance of the window end.
    pub boundary_warning: bool,
}

impl FocalScan {
    pub fn count(&self, kind: FocalKind) -> usize {
        let list = match kind {
            FocalKind::Original => &self.originals,
            FocalKind::Reduced => &self.reduceds,
        };
        list.iter().map(|r| r.multiplicity).sum()
    }
}

type FrameFn<'a> = Box<dyn Fn(&FlowPoint) -> Result<DMatrix<f64>> + 'a>;

#[derive(Debug, Clone)]
struct Tracked {
    point: FlowPoint,
    theta: Vec<f64>,
}

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * (x / (2.0 * PI)).round()
}

fn crossing_count(theta: &[f64]) -> usize {
    theta.iter().map(|&t| if t <= -2.0 * PI { (-t / (2.0 * PI)).floor() as usize } else { 0 }).sum()
}

fn complex_frame(f: &DMatrix<f64>) -> DMatrix<Complex<f64>> {
    let m = f.ncols();
    DMatrix::from_fn(m, m, |i, j| Complex::new(f[(i, j)], f[(m + i, j)]))
}

struct Tracker<'a> {
    model: &'a dyn HamiltonianModel,
    frame_fn: FrameFn<'a>,
    base: DMatrix<f64>,
    base_conj_t: DMatrix<Complex<f64>>,
    /// Base distribution used for the monotonicity check along the orbit.
    check_field: Arc<dyn DistributionField>,
    /// Isotropic subspace whose intersection with the current subspace is
    /// discounted from multiplicities (reduced counting only).
    discount: Option<DMatrix<f64>>,
    kind: FocalKind,
    opts: FocalOptions,
}

impl<'a> Tracker<'a> {
    /// Tracker of the crossings of the curve given by `frame_fn` with its
    /// initial subspace, or with `base` when given. Phases start at 0 for the
    /// directions shared with the base and in (−2π, 0) otherwise, so every
    /// later crossing of −2πm is a genuine intersection.
    fn new(
        model: &'a dyn HamiltonianModel,
        frame_fn: FrameFn<'a>,
        base: Option<DMatrix<f64>>,
        check_field: Arc<dyn DistributionField>,
        kind: FocalKind,
        lambda0: &DVector<f64>,
        opts: FocalOptions,
    ) -> Result<(Self, Tracked)> {
        let p0 = start_point(model, lambda0)?;
        let start = orthonormalize(&frame_fn(&p0)?);
        let shifted = base.is_some();
        let base = base.map(|b| orthonormalize(&b)).unwrap_or_else(|| start.clone());
        let base_conj_t = complex_frame(&base).adjoint();
        let m = base.ncols();
        let tracker = Self { model, frame_fn, base, base_conj_t, check_field, discount: None, kind, opts };
        tracker.check_monotone(&p0)?;
        let theta = if shifted {
            tracker
                .phases(&start)?
                .into_iter()
                .map(|x| if x.abs() <= START_PHASE_TOL { 0.0 } else if x > 0.0 { x - 2.0 * PI } else { x })
                .collect()
        } else {
            vec![0.0; m]
        };
        Ok((tracker, Tracked { point: p0, theta }))
    }

    fn frame(&self, p: &FlowPoint) -> Result<DMatrix<f64>> {
        Ok(orthonormalize(&(self.frame_fn)(p)?))
    }

    fn phases(&self, frame: &DMatrix<f64>) -> Result<Vec<f64>> {
        let w = &self.base_conj_t * complex_frame(frame);
        let m = w.transpose() * &w;
        let ev = m.schur().eigenvalues().ok_or_else(|| {
            Error::Integration { module: "focal_scan", t: f64::NAN, detail: "eigenphase computation failed".into() }
        })?;
        Ok(ev.iter().map(|c| c.im.atan2(c.re)).collect())
    }

    fn check_monotone(&self, p: &FlowPoint) -> Result<()> {
        let q = q_form(self.model, &p.z, self.check_field.as_ref())?;
        let rep = classify_form(&q);
        if rep.class != Monotonicity::MonotoneIncreasing {
            return Err(Error::Monotonicity {
                t: p.t,
                detail: format!(
                    "distribution is {} (Q eigenvalues in [{:.3e}, {:.3e}]); focal counting requires monotone increasing",
                    rep.class.label(),
                    rep.min_eigenvalue,
                    rep.max_eigenvalue
                ),
            });
        }
        Ok(())
    }

    /// Continue the unwrapped phases from `prev` to new principal values;
    /// returns the continued phases and the largest motion.
    fn continue_phases(prev: &[f64], new: &[f64]) -> (Vec<f64>, f64) {
        let m = prev.len();
        let mut pi: Vec<usize> = (0..m).collect();
        pi.sort_by(|&a, &b| wrap(prev[a]).partial_cmp(&wrap(prev[b])).expect("finite phases"));
        let mut ni: Vec<usize> = (0..m).collect();
        ni.sort_by(|&a, &b| new[a].partial_cmp(&new[b]).expect("finite phases"));
        let mut best = (f64::INFINITY, 0usize);
        for r in 0..m {
            let cost = (0..m)
                .map(|i| wrap(new[ni[(i + r) % m]] - prev[pi[i]]).abs())
                .fold(0.0, f64::max);
            if cost < best.0 {
                best = (cost, r);
            }
        }
        let mut out = prev.to_vec();
        for i in 0..m {
            out[pi[i]] = prev[pi[i]] + wrap(new[ni[(i + best.1) % m]] - prev[pi[i]]);
        }
        (out, best.0)
    }

    fn advance_phases(&self, from: &FlowPoint, t: f64) -> Result<(FlowPoint, Vec<f64>)> {
        let point = advance(self.model, from, t, &self.opts.flow)?;
        let phases = self.phases(&self.frame(&point)?)?;
        Ok((point, phases))
    }

    /// Advance the tracked phases to `t`. A step is accepted only if every
    /// phase moves by less than [`MAX_PHASE_STEP`], none increases, and
    /// continuing through the midpoint gives the same unwrapped phases
    /// (which rules out a whole turn hidden inside the step). Otherwise the
    /// step is halved; an increase that survives down to a vanishing step is
    /// reported as non-monotonicity.
    fn step(&self, from: &Tracked, t: f64, depth: usize) -> Result<Tracked> {
        let (point, new) = self.advance_phases(&from.point, t)?;
        let (theta, motion) = Self::continue_phases(&from.theta, &new);
        let increase = from.theta.iter().zip(&theta).map(|(a, b)| (b - a) / (1.0 + a.abs())).fold(0.0, f64::max);
        let mid_t = 0.5 * (from.point.t + t);
        let mut consistent = motion <= MAX_PHASE_STEP && increase <= PHASE_NOISE;
        if consistent {
            let (_, mid_new) = self.advance_phases(&from.point, mid_t)?;
            let (theta_mid, m1) = Self::continue_phases(&from.theta, &mid_new);
            let (theta_end, m2) = Self::continue_phases(&theta_mid, &new);
            let route = theta_end.iter().zip(&theta).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            consistent = m1 <= MAX_PHASE_STEP && m2 <= MAX_PHASE_STEP && route < 1.0;
        }
        if consistent {
            return Ok(Tracked { point, theta });
        }
        if depth > MAX_DEPTH || t - from.point.t < MIN_STEP {
            if increase > PHASE_NOISE {
                return Err(Error::Monotonicity {
                    t,
                    detail: format!("an eigenphase increased by {increase:.3e}; the curve is not monotone"),
                });
            }
            return Err(Error::Integration {
                module: "focal_scan",
                t,
                detail: "eigenphases move too fast to be tracked".into(),
            });
        }
        let mid = self.step(from, mid_t, depth + 1)?;
        self.step(&mid, t, depth + 1)
    }

    fn record(&self, a: &Tracked, b: &Tracked, out: &mut Vec<FocalRecord>) -> Result<()> {
        let mut mult = crossing_count(&b.theta) - crossing_count(&a.theta);
        let frame = self.frame(&b.point)?;
        if let Some(ell) = &self.discount {
            let sv = singular_values(&sigma_mat(&frame, ell));
            let rank = sv.iter().filter(|&&x| x > self.opts.rank_tol).count();
            mult = mult.saturating_sub(ell.ncols() - rank);
        }
        let mut sv = singular_values(&sigma_mat(&frame, &self.base));
        sv.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        let residual = sv.get(mult.saturating_sub(1)).copied().unwrap_or(0.0);
        let singular_multiplicity = sv.iter().filter(|&&x| x <= self.opts.rank_tol).count();
        out.push(FocalRecord {
            time: 0.5 * (a.point.t + b.point.t),
            multiplicity: mult,
            kind: self.kind,
            residual,
            singular_multiplicity,
        });
        Ok(())
    }

    fn bisect(&self, a: &Tracked, b: &Tracked, out: &mut Vec<FocalRecord>) -> Result<()> {
        let (ca, cb) = (crossing_count(&a.theta), crossing_count(&b.theta));
        if cb <= ca {
            return Ok(());
        }
        if b.point.t - a.point.t <= self.opts.time_tol {
            return self.record(a, b, out);
        }
        let mid = self.step(a, 0.5 * (a.point.t + b.point.t), 0)?;
        self.bisect(a, &mid, out)?;
        self.bisect(&mid, b, out)
    }

    fn scan(&self, start: Tracked, window: (f64, f64)) -> Result<(Vec<FocalRecord>, bool)> {
        let grid = uniform_grid(0.0, window.1, self.opts.grid_points + 1);
        let mut prev = start;
        let mut out = Vec::new();
        for &t in &grid[1..] {
            let next = self.step(&prev, t, 0)?;
            self.check_monotone(&next.point)?;
            self.bisect(&prev, &next, &mut out)?;
            prev = next;
        }
        let boundary = out.iter().any(|r| (window.1 - r.time).abs() <= self.opts.time_tol);
        out.retain(|r| r.time > window.0);
        Ok((out, boundary))
    }
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if !(window.0 >= 0.0 && window.1 > window.0 && window.1.is_finite()) {
        return Err(Error::Input(format!(
            "window must satisfy 0 ≤ t_min < t_max, got ({}, {}]",
            window.0, window.1
        )));
    }
    Ok(())
}

/// Focal times of λ₀ for the distribution `field` in the window (t_min, t_max].
pub fn focal_times(
    model: &dyn HamiltonianModel,
    lambda0: &DVector<f64>,
    field: Arc<dyn DistributionField>,
    window: (f64, f64),
    opts: &FocalOptions,
) -> Result<Vec<FocalRecord>> {
    Ok(focal_times_flagged(model, lambda0, field, window, opts)?.0)
}

fn focal_times_flagged(
    model: &dyn HamiltonianModel,
    lambda0: &DVector<f64>,
    field: Arc<dyn DistributionField>,
    window: (f64, f64),
    opts: &FocalOptions,
) -> Result<(Vec<FocalRecord>, bool)> {
    check_window(window)?;
    let f2 = field.clone();
    let frame_fn: FrameFn = Box::new(move |p: &FlowPoint| Ok(jacobi_frame_at(f2.as_ref(), p)?.into_columns()));
    let (tracker, start) = Tracker::new(model, frame_fn, None, field, FocalKind::Original, lambda0, *opts)?;
    tracker.scan(start, window)
}

/// Focal times of λ₀ with respect to the reduction by `integrals` (vertical
/// base distribution).
///
/// The reduced Jacobi curve is the ℓ-reduction Λ ↦ (Λ ∩ ℓ^∠ + ℓ)/ℓ of the
/// original curve J(t), ℓ = g⃗(λ₀), and for a Lagrangian L ⊇ ℓ
///
///   dim(Λ^ℓ ∩ L^ℓ) = dim(Λ ∩ L) − dim(Λ ∩ ℓ).
///
/// So the reduced focal times are the crossings of the smooth curve J(t)
/// with the fixed Lagrangian D^G(λ₀) = (D(λ₀) ∩ ℓ^∠) + ℓ, less any
/// dimension J(t) shares with ℓ. Counting them on J(t) avoids the
/// reduction map itself, which is singular where J(t) ⊇ ℓ and makes the
/// reduced curve turn arbitrarily fast nearby.
pub fn reduced_focal_times(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda0: &DVector<f64>,
    window: (f64, f64),
    opts: &FocalOptions,
) -> Result<Vec<FocalRecord>> {
    Ok(reduced_focal_times_flagged(model, integrals, lambda0, window, opts)?.0)
}

fn reduced_focal_times_flagged(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda0: &DVector<f64>,
    window: (f64, f64),
    opts: &FocalOptions,
) -> Result<(Vec<FocalRecord>, bool)> {
    check_window(window)?;
    let n = model.dof();
    let vertical: Arc<dyn DistributionField> = Arc::new(VerticalDistribution { n });
    if integrals.s() == 0 {
        let (mut recs, b) = focal_times_flagged(model, lambda0, vertical, window, opts)?;
        for r in &mut recs {
            r.kind = FocalKind::Reduced;
        }
        return Ok((recs, b));
    }
    model.check_domain(lambda0)?;
    x_fields_and_upsilon(model, integrals, lambda0)?;
    let ell = integrals.ell_at(lambda0)?;
    let d0 = crate::reduction::reduced_frame_for(vertical.as_ref(), integrals, lambda0)?;
    if d0.intersection_dim > 0 {
        return Err(Error::ReductionDegenerate(format!(
            "D_λ₀ ∩ span g⃗ has dimension {}",
            d0.intersection_dim
        )));
    }
    let field: Arc<dyn DistributionField> = vertical.clone();
    let frame_fn: FrameFn = Box::new(move |p: &FlowPoint| Ok(jacobi_frame_at(field.as_ref(), p)?.into_columns()));
    let (mut tracker, start) =
        Tracker::new(model, frame_fn, Some(d0.frame.columns().clone()), vertical, FocalKind::Reduced, lambda0, *opts)?;
    tracker.discount = Some(ell.vectors().clone());
    tracker.scan(start, window)
}

/// Both scans (run concurrently when the `parallel` feature is on).
pub fn focal_scan(
    model: &dyn HamiltonianModel,
    integrals: &IntegralTuple,
    lambda0: &DVector<f64>,
    window: (f64, f64),
    opts: &FocalOptions,
) -> Result<FocalScan> {
    let n = model.dof();
    let (orig, red) = crate::parallel::join(
        || focal_times_flagged(model, lambda0, Arc::new(VerticalDistribution { n }), window, opts),
        || reduced_focal_times_flagged(model, integrals, lambda0, window, opts),
    );
    let (originals, b1) = orig?;
    let (reduceds, b2) = red?;
    Ok(FocalScan { window, s: integrals.s(), originals, reduceds, boundary_warning: b1 || b2 })
}

/// Count inequality and interleaving of the two focal lists.
#[derive(Debug, Clone)]
pub struct AlternationReport {
    pub original_count: usize,
    pub reduced_count: usize,
    /// #reduced − #original.
    pub count_difference: i64,
    /// 0 ≤ difference ≤ s.
    pub inequality_ok: bool,
    /// For s = 1: τ_i ≤ t_i ≤ τ_{i+1} for all i (multiplicities expanded);
    /// `None` for other s.
    pub alternating_ok: Option<bool>,
    /// The first reduced focal time does not come after the first original one.
    pub first_reduced_first: bool,
    /// Expanded reduced (τ) and original (t) times.
    pub reduced_times: Vec<f64>,
    pub original_times: Vec<f64>,
}

fn expand(records: &[FocalRecord]) -> Vec<f64> {
    records.iter().flat_map(|r| std::iter::repeat(r.time).take(r.multiplicity)).collect()
}

/// Comparison tolerance for the interleaving (nearly coincident original and
/// reduced focal times are common in symmetric orbits).
pub const ALTERNATION_TOL: f64 = 1e-8;

pub fn alternation_report(scan: &FocalScan, s: usize) -> AlternationReport {
    let tau = expand(&scan.reduceds);
    let t = expand(&scan.originals);
    let diff = tau.len() as i64 - t.len() as i64;
    let inequality_ok = diff >= 0 && diff <= s as i64;
    let alternating_ok = (s == 1).then(|| {
        t.iter().enumerate().all(|(i, &ti)| {
            let lower = tau.get(i).map_or(false, |&x| x <= ti + ALTERNATION_TOL);
            let upper = tau.get(i + 1).map_or(true, |&x| ti <= x + ALTERNATION_TOL);
            lower && upper
        })
    });
    let first_reduced_first = match (tau.first(), t.first()) {
        (Some(a), Some(b)) => *a <= b + ALTERNATION_TOL,
        (_, None) => true,
        (None, Some(_)) => false,
    };
    AlternationReport {
        original_count: t.len(),
        reduced_count: tau.len(),
        count_difference: diff,
        inequality_ok,
        alternating_ok,
        first_reduced_first,
        reduced_times: tau,
        original_times: t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{free_particle, make_oscillator};

    fn vertical(n: usize) -> Arc<dyn DistributionField> {
        Arc::new(VerticalDistribution { n })
    }

    #[test]
    fn oscillator_focal_at_pi() {
        let osc = make_oscillator(&[1.0]);
        let z = DVector::from_vec(vec![0.3, 0.5]);
        let recs = focal_times(&osc, &z, vertical(1), (0.0, 3.5), &FocalOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!((recs[0].time - PI).abs() < 1e-8);
        assert_eq!(recs[0].multiplicity, 1);
        assert!(recs[0].residual < 1e-8);
    }

    #[test]
    fn isotropic_oscillator_has_double_focal_point() {
        let osc = make_oscillator(&[1.0, 1.0]);
        let z = DVector::from_vec(vec![0.3, -0.2, 0.5, 0.1]);
        let recs = focal_times(&osc, &z, vertical(2), (0.0, 3.5), &FocalOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].multiplicity, 2);
        assert_eq!(recs[0].singular_multiplicity, 2);
    }

    #[test]
    fn free_particle_has_no_focal_points() {
        let fp = free_particle(2);
        let z = DVector::from_vec(vec![1.0, 0.5, 0.0, 0.0]);
        let opts = FocalOptions { grid_points: 200, ..FocalOptions::default() };
        assert!(focal_times(&fp, &z, vertical(2), (0.0, 10.0), &opts).unwrap().is_empty());
    }

    #[test]
    fn alternation_examples() {
        let rec = |t: f64, kind| FocalRecord { time: t, multiplicity: 1, kind, residual: 0.0, singular_multiplicity: 1 };
        let scan = FocalScan {
            window: (0.0, 1.0),
            s: 1,
            originals: vec![],
            reduceds: vec![rec(0.5, FocalKind::Reduced)],
            boundary_warning: false,
        };
        let rep = alternation_report(&scan, 1);
        assert_eq!(rep.count_difference, 1);
        assert!(rep.inequality_ok && rep.alternating_ok == Some(true));
        let bad = FocalScan { originals: vec![rec(0.3, FocalKind::Original), rec(0.6, FocalKind::Original)], ..scan };
        let rep = alternation_report(&bad, 1);
        assert_eq!(rep.count_difference, -1);
        assert!(!rep.inequality_ok);
    }
}
