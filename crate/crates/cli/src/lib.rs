//! Config-driven batch runner for the `lagcurv` toolkit.
//!
//! A run reads one [`config::RunConfig`], resolves the model, executes the
//! requested analyses ([`runner`]) and writes CSV tables plus a JSON summary
//! ([`report`]). Outputs depend only on the config, so reruns are
//! byte-identical.

pub mod config;
pub mod report;
pub mod runner;

use std::path::{Path, PathBuf};

use lagcurv::ErrorKind;
use thiserror::Error;

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "DYNLAG_OUT_DIR";

#[derive(Debug, Error)]
pub enum RunError {
    /// The config does not parse or violates its documented ranges.
    #[error("config error: {0}")]
    Config(String),

    /// The model cannot be built or the state is outside its domain.
    #[error("model error: {0}")]
    Model(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("[{module}] {source}")]
    Core {
        module: &'static str,
        #[source]
        source: lagcurv::Error,
    },
}

impl From<lagcurv::Error> for RunError {
    fn from(e: lagcurv::Error) -> Self {
        RunError::Core { module: e.module(), source: e }
    }
}

impl RunError {
    /// 2: parse/input, 3: model/domain/output, 4: numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            RunError::Config(_) => 2,
            RunError::Model(_) | RunError::Io(_) => 3,
            RunError::Core { source, .. } => match source.kind() {
                ErrorKind::Input => 2,
                ErrorKind::Domain => 3,
                ErrorKind::Numerical => 4,
            },
        }
    }
}

/// Output directory: the environment override, else the config's
/// `output_dir` (relative to the config file), else `dynlag-out` next to it.
pub fn output_dir(cfg: &config::RunConfig, config_path: &Path) -> PathBuf {
    if let Some(dir) = std::env::var_os(OUT_DIR_ENV).filter(|d| !d.is_empty()) {
        return PathBuf::from(dir);
    }
    let base = config_path.parent().unwrap_or(Path::new("."));
    match &cfg.output_dir {
        Some(d) if d.is_absolute() => d.clone(),
        Some(d) => base.join(d),
        None => base.join("dynlag-out"),
    }
}

/// Load, run and write one config; returns the written file paths.
pub fn run_config(config_path: &Path) -> Result<Vec<PathBuf>, RunError> {
    let cfg = config::RunConfig::load(config_path)?;
    let results = runner::execute(&cfg)?;
    let dir = output_dir(&cfg, config_path);
    report::emit_report(&cfg, &results, &dir)
}

/// Run an already parsed config, writing into `dir`.
pub fn run_with(cfg: &config::RunConfig, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    let results = runner::execute(cfg)?;
    report::emit_report(cfg, &results, dir)
}

/// Example configs shipped with the tool (name, TOML text).
pub const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    ("oscillator_focal", include_str!("../configs/oscillator_focal.toml")),
    ("kepler_curvature", include_str!("../configs/kepler_curvature.toml")),
    ("eight_alternation", include_str!("../configs/eight_alternation.toml")),
];

/// Byte comparison of two output directories; `None` if identical,
/// otherwise a description of the first difference.
pub fn compare_outputs(a: &Path, b: &Path) -> std::io::Result<Option<String>> {
    let list = |d: &Path| -> std::io::Result<Vec<String>> {
        let mut v: Vec<String> = std::fs::read_dir(d)?
            .filter_map(|e| e.ok().map(|e| e.file_name().to_string_lossy().into_owned()))
            .collect();
        v.sort();
        Ok(v)
    };
    let (la, lb) = (list(a)?, list(b)?);
    if la != lb {
        return Ok(Some(format!("file sets differ: {la:?} vs {lb:?}")));
    }
    for name in la {
        if std::fs::read(a.join(&name))? != std::fs::read(b.join(&name))? {
            return Ok(Some(format!("{name} differs")));
        }
    }
    Ok(None)
}

/// Run every bundled config twice into fresh directories under `scratch`
/// and compare the outputs byte for byte.
pub fn determinism_check(scratch: &Path) -> Result<Vec<(String, Option<String>)>, RunError> {
    let mut out = Vec::new();
    for (name, text) in BUNDLED_CONFIGS {
        let cfg = config::RunConfig::parse(text)?;
        let (a, b) = (scratch.join(format!("{name}-a")), scratch.join(format!("{name}-b")));
        for d in [&a, &b] {
            if d.exists() {
                std::fs::remove_dir_all(d).map_err(|e| RunError::Io(e.to_string()))?;
            }
            run_with(&cfg, d)?;
        }
        out.push((name.to_string(), compare_outputs(&a, &b).map_err(|e| RunError::Io(e.to_string()))?));
    }
    Ok(out)
}
