//! Experiment runner: declarative configs, deterministic ensemble averaging
//! and CSV/JSON artifacts with a reproducible manifest.

pub mod config;
mod experiments;
pub mod output;
pub mod presets;

use std::fs;
use std::path::{Path, PathBuf};

use krylov_svd::ensemble::RealizationFailure;
use serde::{Deserialize, Serialize};
use serde_json::json;

pub use config::{Experiment, InitialState, RunConfig, TimeUnits};
use output::Artifacts;

/// Environment variable holding the default output root.
pub const OUTPUT_ENV: &str = "KRYLOV_SVD_OUT";
pub const DEFAULT_OUTPUT_ROOT: &str = "runs";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Usage(String),
    #[error("numeric failure: {0}")]
    Numeric(#[from] krylov_svd::Error),
    #[error("partial results: {0}")]
    Partial(RealizationFailure),
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    /// Process exit code: 2 usage, 3 numeric failure, 4 partial results.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Io { .. } => 2,
            RunError::Numeric(_) => 3,
            RunError::Partial(_) => 4,
        }
    }
}

/// Default output directory of an experiment: `$KRYLOV_SVD_OUT/<name>`, or
/// `runs/<name>` when the variable is unset.
pub fn default_output_dir(name: &str) -> PathBuf {
    let root = std::env::var_os(OUTPUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_ROOT));
    root.join(name)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: RunConfig,
    pub code_version: String,
    pub master_seed: u64,
    pub outputs: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn read(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|source| RunError::Io { path: path.to_path_buf(), source })?;
        serde_json::from_str(&text).map_err(|e| RunError::Usage(format!("invalid manifest {}: {e}", path.display())))
    }
}

/// Runs `config` and writes its artifacts plus `manifest.json`. A failed
/// realization leaves `partial.json` listing the completed ones.
pub fn run(config: &RunConfig) -> Result<Manifest, RunError> {
    config.validate()?;
    let mut out = Artifacts::create(&config.output_dir)?;
    let result = match config.experiment {
        Experiment::Density => experiments::density(config, &mut out),
        Experiment::Lanczos => experiments::lanczos(config, &mut out),
        Experiment::Complexity => experiments::complexity(config, &mut out),
        Experiment::Spacing => experiments::spacing(config, &mut out),
        Experiment::Analytic2x2 => experiments::analytic2x2(config, &mut out),
        Experiment::Peakscan => experiments::peakscan(config, &mut out),
        Experiment::Syk => experiments::syk(config, &mut out),
        Experiment::Hermitize => experiments::hermitize(config, &mut out),
    };
    if let Err(RunError::Partial(f)) = &result {
        out.json(
            "partial.json",
            &json!({ "failed_index": f.index, "error": f.error.to_string(), "completed": f.completed }),
        )?;
    }
    result?;
    let manifest = Manifest {
        config: config.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.ensemble.seed,
        outputs: out.files.clone(),
    };
    out.json(MANIFEST_FILE, &manifest)?;
    Ok(manifest)
}

/// Re-runs the configuration stored in a manifest, optionally elsewhere.
pub fn rerun(manifest: &Path, output_dir: Option<PathBuf>) -> Result<Manifest, RunError> {
    let mut config = Manifest::read(manifest)?.config;
    if let Some(dir) = output_dir {
        config.output_dir = dir;
    }
    run(&config)
}
