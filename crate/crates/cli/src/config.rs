//! Run configuration: a TOML document, validated before anything runs.
//!
//! ```toml
//! seed = 7
//! outputs = ["focal", "reduced-focal", "alternation"]
//! initial_state = [0.2, 1.0, 1.0, 0.0]   # (p, q); optional for "eight"
//! integrals = ["angular_momentum"]
//!
//! [model]
//! name = "kepler"
//!
//! [window]
//! t_min = 0.0
//! t_max = 10.0
//!
//! [tolerances]
//! integrator = 1e-12
//! ```
//!
//! The full grammar is documented in the repository README.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSpec,
    #[serde(default)]
    pub initial_state: Option<Vec<f64>>,
    #[serde(default)]
    pub integrals: Vec<String>,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub outputs: Vec<OutputKind>,
    #[serde(default)]
    pub seed: u64,
    /// Relative paths are resolved against the config file's directory.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub name: String,
    /// oscillator: ω_i, one per degree of freedom.
    #[serde(default)]
    pub frequencies: Option<Vec<f64>>,
    /// nbody: number of bodies.
    #[serde(default)]
    pub bodies: Option<usize>,
    /// natural: monomials of the polynomial potential.
    #[serde(default)]
    pub terms: Option<Vec<TermSpec>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub coefficient: f64,
    pub exponents: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TimeUnit {
    #[default]
    Time,
    /// Multiples of the orbit period (figure-eight only).
    Period,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    #[serde(default)]
    pub t_min: f64,
    pub t_max: f64,
    #[serde(default)]
    pub unit: TimeUnit,
}

/// Numerical settings, echoed verbatim into the JSON summary.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Relative and absolute tolerance of the flow integrator.
    pub integrator: f64,
    /// Bisection tolerance of focal times.
    pub root: f64,
    /// Singular-value threshold of rank decisions (multiplicity audit).
    pub rank: f64,
    /// Stencil step of finite-difference Jacobi-curve jets.
    pub jet_step: f64,
    /// Grid intervals of a focal scan.
    pub grid_points: usize,
    /// Use closed-form curvature where the model has one ("oracle") or
    /// always the finite-difference jet ("jet").
    pub curvature_source: CurvatureSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CurvatureSource {
    Oracle,
    Jet,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            integrator: 1e-12,
            root: 1e-10,
            rank: 1e-8,
            jet_step: 1e-2,
            grid_points: 2000,
            curvature_source: CurvatureSource::Oracle,
        }
    }
}

/// Documented admissible ranges.
pub const INTEGRATOR_RANGE: (f64, f64) = (1e-14, 1e-6);
pub const ROOT_RANGE: (f64, f64) = (1e-14, 1e-4);
pub const RANK_RANGE: (f64, f64) = (1e-14, 1e-2);
pub const JET_STEP_RANGE: (f64, f64) = (1e-4, 1e-1);
pub const GRID_RANGE: (usize, usize) = (10, 1_000_000);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputKind {
    Curvature,
    ReducedCurvature,
    Ricci,
    Focal,
    ReducedFocal,
    Alternation,
}

impl OutputKind {
    pub fn needs_window(&self) -> bool {
        matches!(self, OutputKind::Focal | OutputKind::ReducedFocal | OutputKind::Alternation)
    }
}

impl fmt::Display for OutputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OutputKind::Curvature => "curvature",
            OutputKind::ReducedCurvature => "reduced-curvature",
            OutputKind::Ricci => "ricci",
            OutputKind::Focal => "focal",
            OutputKind::ReducedFocal => "reduced-focal",
            OutputKind::Alternation => "alternation",
        };
        f.write_str(s)
    }
}

fn in_range(name: &str, v: f64, (lo, hi): (f64, f64)) -> Result<(), RunError> {
    if v.is_finite() && v >= lo && v <= hi {
        Ok(())
    } else {
        Err(RunError::Config(format!("tolerances.{name} = {v} outside [{lo:e}, {hi:e}]")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Checks that need no model: ranges, window shape, outputs.
    pub fn validate(&self) -> Result<(), RunError> {
        let t = &self.tolerances;
        in_range("integrator", t.integrator, INTEGRATOR_RANGE)?;
        in_range("root", t.root, ROOT_RANGE)?;
        in_range("rank", t.rank, RANK_RANGE)?;
        in_range("jet_step", t.jet_step, JET_STEP_RANGE)?;
        if t.grid_points < GRID_RANGE.0 || t.grid_points > GRID_RANGE.1 {
            return Err(RunError::Config(format!(
                "tolerances.grid_points = {} outside [{}, {}]",
                t.grid_points, GRID_RANGE.0, GRID_RANGE.1
            )));
        }
        if self.outputs.is_empty() {
            return Err(RunError::Config("outputs must name at least one analysis".into()));
        }
        if let Some(w) = &self.window {
            if !(w.t_min.is_finite() && w.t_max.is_finite() && w.t_min >= 0.0 && w.t_max > w.t_min) {
                return Err(RunError::Config(format!(
                    "window must satisfy 0 ≤ t_min < t_max, got ({}, {}]",
                    w.t_min, w.t_max
                )));
            }
        } else if let Some(o) = self.outputs.iter().find(|o| o.needs_window()) {
            return Err(RunError::Config(format!("output `{o}` needs a [window]")));
        }
        if let Some(z) = &self.initial_state {
            if z.is_empty() || z.len() % 2 != 0 || z.iter().any(|x| !x.is_finite()) {
                return Err(RunError::Config("initial_state must be a non-empty even-length list of finite numbers".into()));
            }
        }
        Ok(())
    }

    /// Sorted, de-duplicated outputs.
    pub fn output_set(&self) -> Vec<OutputKind> {
        let mut v = self.outputs.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        outputs = ["focal"]
        initial_state = [1.0, 0.0]
        [model]
        name = "oscillator"
        [window]
        t_max = 4.0
    "#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.tolerances, Tolerances::default());
        assert_eq!(cfg.seed, 0);
        assert_eq!(cfg.window.unwrap().unit, TimeUnit::Time);
    }

    #[test]
    fn bad_windows_and_tolerances_are_rejected() {
        let bad = MINIMAL.replace("t_max = 4.0", "t_max = -1.0");
        assert!(matches!(RunConfig::parse(&bad), Err(RunError::Config(_))));
        let bad = format!("{MINIMAL}\n[tolerances]\nroot = 1.0\n");
        assert!(matches!(RunConfig::parse(&bad), Err(RunError::Config(_))));
        let bad = MINIMAL.replace("[window]\n        t_max = 4.0", "");
        assert!(matches!(RunConfig::parse(&bad), Err(RunError::Config(_))));
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let bad = MINIMAL.replace("outputs", "outptus");
        assert!(matches!(RunConfig::parse(&bad), Err(RunError::Config(_))));
    }
}
