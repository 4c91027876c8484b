//! Model resolution and execution of the requested analyses.

use std::sync::Arc;

use lagcurv::flow::{hpp, FlowOptions, HamiltonianModel, JetOptions, SharedModel};
use lagcurv::focal::{alternation_report, focal_scan, AlternationReport, FocalOptions, FocalScan};
use lagcurv::linalg::{checked_inverse, sym};
use lagcurv::models::{
    figure_eight_orbit, make_oscillator, nbody_reduced_ricci_closed_form, nbody_reduced_ricci_corrected,
    AngularMomentum, Energy, Kepler, Momentum, NBody, NBodyState, NaturalSystem, PolynomialPotential,
    SharedIntegral, Sphere,
};
use lagcurv::reduction::{check_involution, reduced_curvature, vertical_curvature_form, FormSource, IntegralTuple};
use lagcurv::suites::{rng, uniform_vector};
use lagcurv::verify::random_three_body_state;
use nalgebra::{DMatrix, DVector};

use crate::config::{CurvatureSource, OutputKind, RunConfig, TimeUnit};
use crate::RunError;

/// Model family named in the config.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Oscillator,
    Natural,
    Kepler,
    NBody { bodies: usize },
    Eight,
    Sphere,
}

impl Family {
    fn parse(name: &str) -> Result<Self, RunError> {
        Ok(match name {
            "oscillator" => Family::Oscillator,
            "natural" => Family::Natural,
            "kepler" => Family::Kepler,
            "nbody" => Family::NBody { bodies: 0 },
            "eight" => Family::Eight,
            "sphere" => Family::Sphere,
            other => {
                let known: Vec<&str> = lagcurv::models::MODEL_CATALOGUE.iter().map(|m| m.0).collect();
                return Err(RunError::Model(format!("unknown model `{other}` (known: {})", known.join(", "))));
            }
        })
    }
}

/// A model ready to run.
pub struct Resolved {
    pub family: Family,
    pub name: String,
    pub model: SharedModel,
    pub integrals: IntegralTuple,
    pub integral_names: Vec<String>,
    pub state: DVector<f64>,
    /// Orbit period where the model defines one (figure-eight).
    pub period: Option<f64>,
}

fn build_model(cfg: &RunConfig) -> Result<(Family, SharedModel, Option<(DVector<f64>, f64)>), RunError> {
    let spec = &cfg.model;
    let family = Family::parse(&spec.name)?;
    let state_len = cfg.initial_state.as_ref().map(|z| z.len() / 2);
    Ok(match family {
        Family::Oscillator => {
            let freqs = match (&spec.frequencies, state_len) {
                (Some(f), _) => f.clone(),
                (None, Some(n)) => vec![1.0; n],
                (None, None) => return Err(RunError::Config("oscillator needs `frequencies` or an initial_state".into())),
            };
            if freqs.is_empty() || freqs.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                return Err(RunError::Model("oscillator frequencies must be positive".into()));
            }
            (family, Arc::new(make_oscillator(&freqs)), None)
        }
        Family::Natural => {
            let terms = spec.terms.as_ref().filter(|t| !t.is_empty()).ok_or_else(|| {
                RunError::Config("natural model needs at least one [[model.terms]] entry".into())
            })?;
            let n = terms[0].exponents.len();
            if n == 0 || terms.iter().any(|t| t.exponents.len() != n || !t.coefficient.is_finite()) {
                return Err(RunError::Config("all potential terms need finite coefficients and equally long exponent lists".into()));
            }
            let mut u = PolynomialPotential::zero(n);
            for t in terms {
                u.add_term(t.exponents.clone(), t.coefficient);
            }
            (family, Arc::new(NaturalSystem::new("natural", u)), None)
        }
        Family::Kepler => (family, Arc::new(Kepler), None),
        Family::Sphere => (family, Arc::new(Sphere), None),
        Family::NBody { .. } => {
            let bodies = spec.bodies.or(state_len.map(|n| n / 2)).unwrap_or(3);
            let model = NBody::new(bodies).map_err(|e| RunError::Model(e.to_string()))?;
            (Family::NBody { bodies }, Arc::new(model), None)
        }
        Family::Eight => {
            let orbit = figure_eight_orbit()?;
            (family, Arc::new(NBody::new(3)?), Some((orbit.state, orbit.period)))
        }
    })
}

fn build_integral(name: &str, family: Family, model: &SharedModel) -> Result<SharedIntegral, RunError> {
    let n = model.dof();
    let bad = |why: &str| RunError::Config(format!("integral `{name}`: {why}"));
    let index = |s: &str| -> Result<usize, RunError> {
        let k: usize = s.trim().parse().map_err(|_| bad("indices are 1-based integers"))?;
        if k == 0 || k > n {
            return Err(bad(&format!("index {k} outside 1..={n}")));
        }
        Ok(k - 1)
    };
    Ok(match name {
        "energy" => Arc::new(Energy::new(model.clone())),
        "p_phi" if matches!(family, Family::Kepler | Family::Sphere) => Arc::new(Momentum::new("p_phi", 2, 1)),
        "angular_momentum" => match family {
            Family::Kepler | Family::Sphere => Arc::new(Momentum::new("p_phi", 2, 1)),
            Family::NBody { bodies } => Arc::new(AngularMomentum::planar_bodies(bodies)),
            Family::Eight => Arc::new(AngularMomentum::planar_bodies(3)),
            Family::Oscillator | Family::Natural if n >= 2 => Arc::new(AngularMomentum::new(n, vec![(0, 1)])),
            _ => return Err(bad("needs at least two degrees of freedom")),
        },
        other => {
            if let Some(k) = other.strip_prefix("momentum:") {
                let k = index(k)?;
                Arc::new(Momentum::new(format!("p{}", k + 1), n, k))
            } else if let Some(pair) = other.strip_prefix("rotation:") {
                let (i, j) = pair.split_once(',').ok_or_else(|| bad("expected rotation:i,j"))?;
                let (i, j) = (index(i)?, index(j)?);
                if i == j {
                    return Err(bad("rotation needs two distinct coordinates"));
                }
                Arc::new(AngularMomentum::new(n, vec![(i, j)]))
            } else {
                return Err(bad("unknown (use energy, angular_momentum, p_phi, momentum:k or rotation:i,j)"));
            }
        }
    })
}

/// Resolve model, integrals and initial state; checks the state domain and
/// that the integrals Poisson-commute near the initial state.
pub fn resolve(cfg: &RunConfig) -> Result<Resolved, RunError> {
    let (family, model, calibrated) = build_model(cfg)?;
    let n = model.dof();
    let (state, period) = match (&cfg.initial_state, calibrated, family) {
        (Some(z), cal, _) => (DVector::from_column_slice(z), cal.map(|c| c.1)),
        (None, Some((z, t)), _) => (z, Some(t)),
        (None, None, Family::NBody { bodies: 3 }) => (random_three_body_state(&mut rng(cfg.seed)), None),
        (None, None, _) => return Err(RunError::Config(format!("model `{}` needs an initial_state", cfg.model.name))),
    };
    if state.len() != 2 * n {
        return Err(RunError::Config(format!("initial_state has length {}, model `{}` needs {}", state.len(), cfg.model.name, 2 * n)));
    }
    model.check_domain(&state)?;
    let list = cfg
        .integrals
        .iter()
        .map(|name| build_integral(name, family, &model))
        .collect::<Result<Vec<_>, _>>()?;
    let integrals = IntegralTuple::new(n, list)?;
    if integrals.s() > 0 {
        audit_involution(model.as_ref(), &integrals, &state, cfg.seed)?;
    }
    Ok(Resolved {
        family,
        name: cfg.model.name.clone(),
        model,
        integral_names: integrals.names(),
        integrals,
        state,
        period,
    })
}

fn audit_involution(model: &dyn HamiltonianModel, ints: &IntegralTuple, z: &DVector<f64>, seed: u64) -> Result<(), RunError> {
    let mut r = rng(seed ^ 0x5eed);
    let scale = 1e-2 * (1.0 + z.amax());
    let samples: Vec<DVector<f64>> = (0..40)
        .map(|_| z + uniform_vector(&mut r, z.len(), scale))
        .filter(|s| model.check_domain(s).is_ok())
        .take(12)
        .collect();
    if samples.len() < 10 {
        return Ok(());
    }
    let rep = check_involution(model, ints, &samples)?;
    if !rep.passed {
        return Err(RunError::Model(format!(
            "integrals {:?} are not in involution with H near the initial state (worst bracket {:?})",
            ints.names(),
            rep.worst
        )));
    }
    Ok(())
}

/// Reduced part of a curvature report.
#[derive(Debug, Clone)]
pub struct ReducedPart {
    /// Impulse coefficients of the basis of K = D ∩ ⋂ ker dg_i (n × (n−s)).
    pub k_basis: DMatrix<f64>,
    pub form: DMatrix<f64>,
    pub operator: DMatrix<f64>,
    pub delta_form: DMatrix<f64>,
    pub ricci: f64,
    pub x_term: f64,
    pub delta_trace: f64,
}

#[derive(Debug, Clone)]
pub struct CurvatureResult {
    pub source: FormSource,
    /// Curvature form and operator on the impulse basis ∂p.
    pub form: DMatrix<f64>,
    pub operator: DMatrix<f64>,
    pub ricci: f64,
    pub reduced: Option<ReducedPart>,
}

/// One entry of the discrepancy log: a computed value next to an
/// independent reference.
#[derive(Debug, Clone)]
pub struct Discrepancy {
    pub quantity: String,
    pub computed: f64,
    pub reference: f64,
    pub note: String,
}

impl Discrepancy {
    pub fn deviation(&self) -> f64 {
        (self.computed - self.reference).abs()
    }
}

pub struct RunResults {
    pub resolved: Resolved,
    /// Window in time units.
    pub window: Option<(f64, f64)>,
    pub curvature: Option<CurvatureResult>,
    pub focal: Option<FocalScan>,
    pub alternation: Option<AlternationReport>,
    /// Closed-form reference values (name, value).
    pub references: Vec<(String, f64)>,
    pub discrepancies: Vec<Discrepancy>,
}

fn curvature(cfg: &RunConfig, res: &Resolved) -> Result<CurvatureResult, RunError> {
    let model = res.model.as_ref();
    let jet = JetOptions { step: cfg.tolerances.jet_step, ..JetOptions::default() };
    let prefer = cfg.tolerances.curvature_source == CurvatureSource::Oracle;
    let q = sym(&hpp(model, &res.state));
    let qinv = checked_inverse(&q, 1e-10, "H_pp")?;
    let want_reduced = cfg.wants(OutputKind::ReducedCurvature) || (cfg.wants(OutputKind::Ricci) && res.integrals.s() > 0);
    if want_reduced {
        let rc = reduced_curvature(model, &res.integrals, &res.state, prefer, &jet)?;
        let n = model.dof();
        let operator = &qinv * &rc.original_form;
        Ok(CurvatureResult {
            source: rc.source,
            ricci: rc.original_ricci,
            operator,
            form: rc.original_form,
            reduced: Some(ReducedPart {
                k_basis: rc.reduction.k_basis.rows(0, n).into_owned(),
                form: rc.reduced_form,
                operator: rc.reduced_operator,
                delta_form: rc.reduction.delta_form,
                ricci: rc.reduced_ricci,
                x_term: rc.x_term,
                delta_trace: rc.delta_trace,
            }),
        })
    } else {
        let (form, source) = vertical_curvature_form(model, &res.state, prefer, &jet)?;
        let operator = &qinv * &form;
        Ok(CurvatureResult { source, ricci: operator.trace(), operator, form, reduced: None })
    }
}

fn focal_options(cfg: &RunConfig) -> FocalOptions {
    let t = &cfg.tolerances;
    FocalOptions {
        grid_points: t.grid_points,
        time_tol: t.root,
        rank_tol: t.rank,
        flow: FlowOptions::with_tolerance(t.integrator),
    }
}

fn time_window(cfg: &RunConfig, res: &Resolved) -> Result<Option<(f64, f64)>, RunError> {
    let Some(w) = cfg.window else { return Ok(None) };
    let scale = match (w.unit, res.period) {
        (TimeUnit::Time, _) => 1.0,
        (TimeUnit::Period, Some(t)) => t,
        (TimeUnit::Period, None) => {
            return Err(RunError::Config(format!("window unit `period` needs a periodic model, `{}` has none", res.name)))
        }
    };
    Ok(Some((w.t_min * scale, w.t_max * scale)))
}

/// Closed-form values the model provides at the initial state, and their
/// comparison with the computed curvature.
fn references(res: &Resolved, curv: Option<&CurvatureResult>) -> (Vec<(String, f64)>, Vec<Discrepancy>) {
    let z = &res.state;
    let n = res.model.dof();
    let mut refs = Vec::new();
    let mut log = Vec::new();
    if let Some(p) = res.period {
        refs.push(("period".to_string(), p));
    }
    match res.family {
        Family::Kepler => {
            let (c, r) = (z[1], z[2]);
            let original = Kepler::radial_curvature(r);
            let reduced = Kepler::reduced_radial_curvature(r, c);
            refs.push(("radial_curvature".into(), original));
            refs.push(("reduced_radial_curvature".into(), reduced));
            if let Some(cv) = curv {
                log.push(Discrepancy {
                    quantity: "curvature_form[1,1]".into(),
                    computed: cv.form[(0, 0)],
                    reference: original,
                    note: "radial curvature −2/r³".into(),
                });
                if let Some(red) = cv.reduced.as_ref().filter(|r| r.operator.nrows() == 1) {
                    log.push(Discrepancy {
                        quantity: "reduced_curvature_operator[1,1]".into(),
                        computed: red.operator[(0, 0)],
                        reference: reduced,
                        note: "amended-potential curvature 3c²/r⁴ − 2/r³".into(),
                    });
                }
            }
        }
        Family::Oscillator | Family::Natural => {
            if let Some(cv) = curv {
                let hess = res.model.hessian(z).view((n, n), (n, n)).into_owned();
                log.push(Discrepancy {
                    quantity: "curvature_form".into(),
                    computed: (&cv.form - &hess).amax(),
                    reference: 0.0,
                    note: "max entrywise difference from Hess U".into(),
                });
            }
        }
        Family::Sphere => {
            let reference = 2.0 * res.model.energy(z);
            refs.push(("ricci".into(), reference));
            if let Some(cv) = curv {
                log.push(Discrepancy {
                    quantity: "ricci".into(),
                    computed: cv.ricci,
                    reference,
                    note: "unit sphere: ρ = 2H (1 at unit speed)".into(),
                });
            }
        }
        Family::NBody { .. } | Family::Eight if res.integrals.s() > 0 => {
            let bodies = n / 2;
            let closed = NBodyState::from_phase(bodies, z).and_then(|s| {
                Ok((nbody_reduced_ricci_closed_form(&s)?, nbody_reduced_ricci_corrected(&s)?))
            });
            if let Ok((printed, corrected)) = closed {
                refs.push(("reduced_ricci_closed_form_printed".into(), printed));
                refs.push(("reduced_ricci_closed_form_corrected".into(), corrected));
                if let Some(red) = curv.and_then(|c| c.reduced.as_ref()) {
                    log.push(Discrepancy {
                        quantity: "reduced_ricci".into(),
                        computed: red.ricci,
                        reference: printed,
                        note: "closed form as printed, with −U/I; known sign error".into(),
                    });
                    log.push(Discrepancy {
                        quantity: "reduced_ricci".into(),
                        computed: red.ricci,
                        reference: corrected,
                        note: "closed form with +U/I".into(),
                    });
                }
            }
        }
        _ => {}
    }
    (refs, log)
}

fn focal_audit(scan: &FocalScan, log: &mut Vec<Discrepancy>) {
    for r in scan.originals.iter().chain(&scan.reduceds) {
        if r.singular_multiplicity != r.multiplicity {
            log.push(Discrepancy {
                quantity: format!("{} focal multiplicity at t = {:.12}", r.kind.label(), r.time),
                computed: r.multiplicity as f64,
                reference: r.singular_multiplicity as f64,
                note: "eigenphase count vs. singular values below the rank tolerance".into(),
            });
        }
    }
    if scan.boundary_warning {
        log.push(Discrepancy {
            quantity: "window end".into(),
            computed: scan.window.1,
            reference: scan.window.1,
            note: "a focal time lies within the root tolerance of t_max; rerun with a larger window".into(),
        });
    }
}

/// Run every analysis requested by `cfg`. Curvature and focal analyses are
/// independent and run concurrently.
pub fn execute(cfg: &RunConfig) -> Result<RunResults, RunError> {
    let resolved = resolve(cfg)?;
    let window = time_window(cfg, &resolved)?;
    let want_curvature = [OutputKind::Curvature, OutputKind::ReducedCurvature, OutputKind::Ricci]
        .iter()
        .any(|k| cfg.wants(*k));
    let want_focal = cfg.outputs.iter().any(|o| o.needs_window());
    let res = &resolved;
    let (curv, focal) = lagcurv::parallel::join(
        || want_curvature.then(|| curvature(cfg, res)).transpose(),
        || -> Result<Option<FocalScan>, RunError> {
            match (want_focal, window) {
                (true, Some(w)) => {
                    Ok(Some(focal_scan(res.model.as_ref(), &res.integrals, &res.state, w, &focal_options(cfg))?))
                }
                _ => Ok(None),
            }
        },
    );
    let (curvature, focal) = (curv?, focal?);
    let (references, mut discrepancies) = references(&resolved, curvature.as_ref());
    if let Some(scan) = &focal {
        focal_audit(scan, &mut discrepancies);
    }
    let alternation = focal.as_ref().map(|s| alternation_report(s, resolved.integrals.s()));
    Ok(RunResults { resolved, window, curvature, focal, alternation, references, discrepancies })
}
