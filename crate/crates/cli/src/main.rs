use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use krylov_svd::ensembles::{EnsembleKind, EnsembleSpec, SymmetryClass};
use krylov_svd::krylov::{Normalization, Spacing};
use krylov_svd_cli::{
    default_output_dir, presets, rerun, run, Experiment, InitialState, RunConfig, RunError, TimeUnits,
};

#[derive(Parser)]
#[command(name = "krylov-svd", version, about = "Krylov complexity of non-Hermitian random matrices via the SVD")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Singular-value density histogram.
    Density(RunArgs),
    /// Ensemble-mean Lanczos coefficients and bulk fit.
    Lanczos(RunArgs),
    /// Ensemble-mean spread complexity of the thermal state.
    Complexity(RunArgs),
    /// Singular-value spacing ratios.
    Spacing(RunArgs),
    /// Two-level closed forms against Monte Carlo for the 2x2 classes.
    #[command(name = "analytic2x2")]
    Analytic2x2(RunArgs),
    /// Peak time and height of the two-level average versus Dyson index.
    Peakscan(RunArgs),
    /// Non-Hermitian SYK complexity at one or more inverse temperatures.
    Syk(RunArgs),
    /// Hermitized-matrix Lanczos coefficients and complexity.
    Hermitize(RunArgs),
    /// Run a committed figure preset.
    Preset {
        /// Preset name; omit with --list.
        name: Option<String>,
        #[arg(long)]
        list: bool,
        /// Output root (default: $KRYLOV_SVD_OUT or ./runs).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
        /// Override the realization count of every run.
        #[arg(long)]
        realizations: Option<usize>,
    },
    /// Re-run the configuration stored in a manifest.
    Rerun {
        manifest: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EnsembleArg {
    Ginoe,
    Ginue,
    Ginse,
    DiagPoisson,
    Interpolating,
    Nhsyk,
    Class2x2,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpacingArg {
    Linear,
    Log,
    Hybrid,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormalizationArg {
    Raw,
    ChainLength,
    Dimension,
}

#[derive(Clone, Copy, ValueEnum)]
enum StateArg {
    E0,
    Thermal,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitsArg {
    MeanSpacing,
    Raw,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    ensemble: Option<EnsembleArg>,
    #[arg(long, default_value_t = 100)]
    dim: usize,
    /// Interpolation parameter of the interpolating ensemble.
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
    /// Number of Majorana fermions (syk).
    #[arg(long = "N", default_value_t = 16)]
    n_majorana: usize,
    /// Symmetry class of the class2x2 ensemble.
    #[arg(long, default_value = "A")]
    class: SymmetryClass,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, alias = "samples", default_value_t = 100)]
    realizations: usize,
    /// Inverse temperature of the thermal initial state.
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    /// Dyson indices (analytic2x2, peakscan) or inverse temperatures (syk).
    #[arg(long, value_delimiter = ',')]
    betas: Option<Vec<f64>>,
    /// Monte Carlo classes for analytic2x2.
    #[arg(long, value_delimiter = ',')]
    classes: Option<Vec<SymmetryClass>>,
    #[arg(long)]
    t_min: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, value_enum)]
    spacing: Option<SpacingArg>,
    /// End of the linear segment of a hybrid grid.
    #[arg(long)]
    split: Option<f64>,
    #[arg(long, value_enum)]
    time_units: Option<UnitsArg>,
    #[arg(long, value_enum)]
    normalization: Option<NormalizationArg>,
    #[arg(long, value_enum)]
    initial_state: Option<StateArg>,
    /// Output directory (default: $KRYLOV_SVD_OUT/<experiment> or ./runs/<experiment>).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl RunArgs {
    fn into_config(self, experiment: Experiment) -> Result<RunConfig, RunError> {
        let kind = match (experiment, self.ensemble) {
            (Experiment::Syk, None) | (_, Some(EnsembleArg::Nhsyk)) => {
                EnsembleKind::NHSYK { n_majorana: self.n_majorana }
            }
            (Experiment::Analytic2x2 | Experiment::Peakscan, None) | (_, Some(EnsembleArg::Class2x2)) => {
                EnsembleKind::Class2x2 { class: self.class }
            }
            (_, None) | (_, Some(EnsembleArg::Ginue)) => EnsembleKind::GinUE,
            (_, Some(EnsembleArg::Ginoe)) => EnsembleKind::GinOE,
            (_, Some(EnsembleArg::Ginse)) => EnsembleKind::GinSE,
            (_, Some(EnsembleArg::DiagPoisson)) => EnsembleKind::DiagPoisson,
            (_, Some(EnsembleArg::Interpolating)) => EnsembleKind::Interpolating { nu: self.nu },
        };
        let ensemble = EnsembleSpec::new(kind, self.dim, self.seed, self.realizations)
            .map_err(|e| RunError::Usage(e.to_string()))?;
        let out = self.out.unwrap_or_else(|| default_output_dir(experiment.name()));
        let mut c = RunConfig::new(experiment, ensemble, out);
        c.beta_temperature = self.beta;
        c.workers = self.workers;
        if let Some(b) = self.betas {
            c.betas = b;
        }
        if let Some(cl) = self.classes {
            c.classes = cl;
        }
        let g = &mut c.time_grid;
        if let Some(v) = self.t_min {
            g.t_min = v;
        }
        if let Some(v) = self.t_max {
            g.t_max = v;
        }
        if let Some(v) = self.points {
            g.points = v;
        }
        if let Some(v) = self.split {
            g.split = Some(v);
        }
        if let Some(s) = self.spacing {
            g.spacing = match s {
                SpacingArg::Linear => Spacing::Linear,
                SpacingArg::Log => Spacing::Log,
                SpacingArg::Hybrid => Spacing::Hybrid,
            };
        }
        if let Some(u) = self.time_units {
            c.time_units = match u {
                UnitsArg::MeanSpacing => TimeUnits::MeanSpacing,
                UnitsArg::Raw => TimeUnits::Raw,
            };
        }
        if let Some(n) = self.normalization {
            c.normalization = match n {
                NormalizationArg::Raw => Normalization::Raw,
                NormalizationArg::ChainLength => Normalization::ChainLength,
                NormalizationArg::Dimension => Normalization::Dimension(c.ensemble.dim),
            };
        }
        if let Some(s) = self.initial_state {
            c.initial_state = Some(match s {
                StateArg::E0 => InitialState::E0,
                StateArg::Thermal => InitialState::Thermal,
            });
        }
        Ok(c)
    }
}

fn execute(cli: Cli) -> Result<(), RunError> {
    let (experiment, args) = match cli.command {
        Command::Density(a) => (Experiment::Density, a),
        Command::Lanczos(a) => (Experiment::Lanczos, a),
        Command::Complexity(a) => (Experiment::Complexity, a),
        Command::Spacing(a) => (Experiment::Spacing, a),
        Command::Analytic2x2(a) => (Experiment::Analytic2x2, a),
        Command::Peakscan(a) => (Experiment::Peakscan, a),
        Command::Syk(a) => (Experiment::Syk, a),
        Command::Hermitize(a) => (Experiment::Hermitize, a),
        Command::Preset { list: true, .. } => {
            for name in presets::names() {
                println!("{name}: {}", presets::load(name)?.description);
            }
            return Ok(());
        }
        Command::Preset { name, out, workers, realizations, .. } => {
            let name = name.ok_or_else(|| RunError::Usage("preset name required (or --list)".into()))?;
            let root = out.unwrap_or_else(|| default_output_dir(""));
            for m in presets::load(&name)?.run_all(&root, workers, realizations)? {
                println!("{}", m.config.output_dir.display());
            }
            return Ok(());
        }
        Command::Rerun { manifest, out } => {
            let m = rerun(&manifest, out)?;
            println!("{}", m.config.output_dir.display());
            return Ok(());
        }
    };
    let m = run(&args.into_config(experiment)?)?;
    println!("{}", m.config.output_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("krylov-svd: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
