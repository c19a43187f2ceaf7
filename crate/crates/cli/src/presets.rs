//! Committed figure presets (`presets/*.json`). Each run's `output_dir` is
//! relative to `<root>/<preset name>/`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{run, Manifest, RunConfig, RunError};

const SOURCES: [(&str, &str); 6] = [
    ("fig1", include_str!("../presets/fig1.json")),
    ("fig2-top", include_str!("../presets/fig2-top.json")),
    ("fig2-bottom", include_str!("../presets/fig2-bottom.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig4", include_str!("../presets/fig4.json")),
    ("fig5", include_str!("../presets/fig5.json")),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Preset {
    pub name: String,
    pub description: String,
    pub runs: Vec<RunConfig>,
}

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn load(name: &str) -> Result<Preset, RunError> {
    let (_, text) = SOURCES.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        RunError::Usage(format!("unknown preset '{name}' (available: {})", names().collect::<Vec<_>>().join(", ")))
    })?;
    serde_json::from_str(text).map_err(|e| RunError::Usage(format!("preset {name} is malformed: {e}")))
}

impl Preset {
    /// Configs with output directories placed under `root/<name>/`, and
    /// optional overrides for quick, scaled-down runs.
    pub fn resolve(&self, root: &Path, workers: usize, realizations: Option<usize>) -> Vec<RunConfig> {
        self.runs
            .iter()
            .map(|r| {
                let mut c = r.clone();
                c.output_dir = root.join(&self.name).join(&r.output_dir);
                c.workers = workers;
                if let Some(n) = realizations {
                    c.ensemble.realizations = n;
                }
                c
            })
            .collect()
    }

    pub fn run_all(&self, root: &Path, workers: usize, realizations: Option<usize>) -> Result<Vec<Manifest>, RunError> {
        self.resolve(root, workers, realizations).iter().map(run).collect()
    }
}
