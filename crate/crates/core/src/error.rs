use thiserror::Error;

/// Failure modes shared by every module of the toolkit.
///
/// Variants are grouped by what a caller can do about them: input problems
/// (`Dimension`, `Input`), model/domain problems (`Domain`), and numerical
/// failures (everything else). [`Error::kind`] exposes that grouping.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("{model}: state outside the model domain ({detail})")]
    Domain { model: String, detail: String },

    #[error("frame `{which}` is not transversal to the base subspace (singular-value ratio {ratio:.3e})")]
    Transversality { which: String, ratio: f64 },

    #[error("chart failure: {0}")]
    Chart(String),

    #[error("irregular curve: {0}")]
    Regularity(String),

    #[error("reduction degenerate: {0}")]
    ReductionDegenerate(String),

    #[error("normal form not attainable: {0}")]
    Normalization(String),

    #[error("rank deficiency: {0}")]
    Rank(String),

    #[error("[{module}] integration failed at t = {t:.12e}: {detail}")]
    Integration {
        module: &'static str,
        t: f64,
        detail: String,
    },

    #[error("[focal_scan] curve not monotone at t = {t:.12e}: {detail}")]
    Monotonicity { t: f64, detail: String },

    #[error("calibration failed: {0}")]
    Calibration(String),
}

/// Coarse classification used by front ends to choose exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Input,
    Domain,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Dimension(_) | Error::Input(_) => ErrorKind::Input,
            Error::Domain { .. } => ErrorKind::Domain,
            _ => ErrorKind::Numerical,
        }
    }

    /// Name of the module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::Dimension(_) | Error::Input(_) | Error::Transversality { .. } => "symplectic_core",
            Error::Normalization(_) => "symplectic_core",
            Error::Chart(_) | Error::Regularity(_) => "jacobi_geometry",
            Error::ReductionDegenerate(_) | Error::Rank(_) => "integral_reduction",
            Error::Domain { .. } | Error::Calibration(_) => "model_library",
            Error::Integration { module, .. } => module,
            Error::Monotonicity { .. } => "focal_scan",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
