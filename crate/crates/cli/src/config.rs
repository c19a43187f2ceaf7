use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use krylov_svd::ensembles::{EnsembleKind, EnsembleSpec, SymmetryClass};
use krylov_svd::krylov::{Normalization, TimeGrid};
use serde::{Deserialize, Serialize};

use crate::RunError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Density,
    Lanczos,
    Complexity,
    Spacing,
    #[serde(rename = "analytic2x2")]
    Analytic2x2,
    Peakscan,
    Syk,
    Hermitize,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Self::Density,
        Self::Lanczos,
        Self::Complexity,
        Self::Spacing,
        Self::Analytic2x2,
        Self::Peakscan,
        Self::Syk,
        Self::Hermitize,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Density => "density",
            Self::Lanczos => "lanczos",
            Self::Complexity => "complexity",
            Self::Spacing => "spacing",
            Self::Analytic2x2 => "analytic2x2",
            Self::Peakscan => "peakscan",
            Self::Syk => "syk",
            Self::Hermitize => "hermitize",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = RunError;

    fn from_str(s: &str) -> Result<Self, RunError> {
        Self::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| RunError::Usage(format!("unknown experiment '{s}'")))
    }
}

/// State the Lanczos chain starts from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    /// Canonical basis vector `e_0` (needs the full matrix).
    E0,
    /// Thermal state at `beta_temperature` (depends on the spectrum only).
    Thermal,
}

/// Unit of the time axis of complexity curves.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeUnits {
    /// Times in units of the inverse ensemble-mean level spacing.
    MeanSpacing,
    /// Times in the units of the sampled matrices.
    Raw,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub ensemble: EnsembleSpec,
    /// Inverse temperature of the thermal initial state (not a Dyson index).
    #[serde(default)]
    pub beta_temperature: f64,
    #[serde(default)]
    pub time_grid: TimeGrid,
    pub output_dir: PathBuf,
    /// Worker threads; 0 uses all cores.
    #[serde(default)]
    pub workers: usize,
    /// Dyson indices (analytic2x2, peakscan) or inverse temperatures (syk).
    #[serde(default)]
    pub betas: Vec<f64>,
    /// Monte Carlo classes for analytic2x2; empty derives them from `betas`.
    #[serde(default)]
    pub classes: Vec<SymmetryClass>,
    #[serde(default = "default_normalization")]
    pub normalization: Normalization,
    #[serde(default)]
    pub initial_state: Option<InitialState>,
    #[serde(default = "default_time_units")]
    pub time_units: TimeUnits,
    /// Plateau window as fractions of `t_max`.
    #[serde(default = "default_plateau_window")]
    pub plateau_window: (f64, f64),
}

fn default_normalization() -> Normalization {
    Normalization::ChainLength
}

fn default_time_units() -> TimeUnits {
    TimeUnits::MeanSpacing
}

fn default_plateau_window() -> (f64, f64) {
    (0.2, 1.0)
}

impl RunConfig {
    /// Defaults for `experiment` with the given ensemble.
    pub fn new(experiment: Experiment, ensemble: EnsembleSpec, output_dir: PathBuf) -> Self {
        let time_grid = match experiment {
            Experiment::Analytic2x2 => TimeGrid::linear(0.0, 10.0, 101),
            _ => TimeGrid::default(),
        };
        let betas = match experiment {
            Experiment::Analytic2x2 => vec![1.0, 2.0, 4.0],
            Experiment::Peakscan => (0..=200).map(|i| i as f64 * 0.05).collect(),
            _ => vec![],
        };
        Self {
            experiment,
            ensemble,
            beta_temperature: 0.0,
            time_grid,
            output_dir,
            workers: 0,
            betas,
            classes: vec![],
            normalization: default_normalization(),
            initial_state: None,
            time_units: default_time_units(),
            plateau_window: default_plateau_window(),
        }
    }

    pub fn initial_state(&self) -> InitialState {
        self.initial_state.unwrap_or(match self.experiment {
            Experiment::Lanczos => InitialState::E0,
            _ => InitialState::Thermal,
        })
    }

    /// Inverse temperatures of a syk run.
    pub fn thermal_betas(&self) -> Vec<f64> {
        if self.betas.is_empty() {
            vec![self.beta_temperature]
        } else {
            self.betas.clone()
        }
    }

    /// Monte Carlo classes of an analytic2x2 run.
    pub fn mc_classes(&self) -> Vec<SymmetryClass> {
        if !self.classes.is_empty() {
            return self.classes.clone();
        }
        self.betas
            .iter()
            .filter_map(|&b| match b {
                1.0 => Some(SymmetryClass::AI),
                2.0 => Some(SymmetryClass::A),
                4.0 => Some(SymmetryClass::AII),
                _ => None,
            })
            .collect()
    }

    /// Plateau window in absolute time.
    pub fn plateau_window_abs(&self) -> (f64, f64) {
        let t = self.time_grid.t_max;
        (self.plateau_window.0 * t, self.plateau_window.1 * t)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        let usage = |e: krylov_svd::Error| RunError::Usage(e.to_string());
        let e = &self.ensemble;
        let checked = EnsembleSpec::new(e.kind.clone(), e.dim, e.seed, e.realizations).map_err(usage)?;
        if checked.dim != e.dim {
            return Err(RunError::Usage(format!(
                "ensemble dimension {} is fixed to {} for {:?}",
                e.dim, checked.dim, e.kind
            )));
        }
        self.time_grid.validate().map_err(usage)?;
        if !(self.beta_temperature >= 0.0 && self.beta_temperature.is_finite()) {
            return Err(RunError::Usage(format!("beta_temperature must be >= 0, got {}", self.beta_temperature)));
        }
        if self.betas.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
            return Err(RunError::Usage("betas must be finite and >= 0".into()));
        }
        let (lo, hi) = self.plateau_window;
        if !(0.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(RunError::Usage(format!("plateau window ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")));
        }
        match self.experiment {
            Experiment::Syk if !matches!(e.kind, EnsembleKind::NHSYK { .. }) => {
                Err(RunError::Usage("the syk experiment needs an NHSYK ensemble".into()))
            }
            Experiment::Analytic2x2 if self.betas.is_empty() && self.classes.is_empty() => {
                Err(RunError::Usage("analytic2x2 needs at least one beta or class".into()))
            }
            Experiment::Peakscan if self.betas.is_empty() => {
                Err(RunError::Usage("peakscan needs at least one beta".into()))
            }
            _ => Ok(()),
        }
    }
}
