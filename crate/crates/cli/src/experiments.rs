use krylov_svd::analytic::{find_beta_min, ks_2x2_or_poisson, peak_scan};
use krylov_svd::c64;
use krylov_svd::decomp::{lanczos_spectral, singular_values, thermal_weights, LanczosCoefficients, SingularSpectrum};
use krylov_svd::ensemble::{e0_chain, hermitized_chain, map_realizations, realization_spectrum};
use krylov_svd::ensembles::{EnsembleKind, EnsembleSpec, SymmetryClass};
use krylov_svd::hermitization::restricted_equivalence_check;
use krylov_svd::krylov::{complexity_curve, Peak};
use krylov_svd::spectral::{
    fit_bulk, pad_coefficients, pool_spacing, quadrant_edge_coefficients, quadrant_law, spacing_ratios, BulkProfile,
    Histogram,
};
use krylov_svd::stats::{mean_stderr, EnsembleCoefficients, EnsembleCurve};
use serde::Serialize;
use serde_json::json;

use crate::config::{InitialState, RunConfig, TimeUnits};
use crate::output::{Artifacts, Cell, Csv};
use crate::RunError;

/// Quadrant-law bulk profile the Ginibre chains are compared with.
const BULK_P: f64 = 0.28;
const BULK_Q: f64 = 0.88;
const BULK_GAMMA: f64 = 1.2;
/// Moment-method coefficients used for the edge of the theory columns.
const EDGE_ORDER: usize = 12;

fn per_realization<T: Send>(
    cfg: &RunConfig,
    f: impl Fn(usize) -> krylov_svd::Result<T> + Sync + Send,
) -> Result<Vec<T>, RunError> {
    map_realizations(cfg.ensemble.realizations, cfg.workers, f).map_err(RunError::Partial)
}

fn spectra(cfg: &RunConfig) -> Result<Vec<SingularSpectrum>, RunError> {
    per_realization(cfg, |i| realization_spectrum(&cfg.ensemble, i))
}

fn is_ginibre(kind: &EnsembleKind) -> bool {
    matches!(kind, EnsembleKind::GinOE | EnsembleKind::GinUE | EnsembleKind::GinSE)
}

/// Ensemble mean of `(σ_max − σ_min)/(n − 1)`, or 1 for raw time units.
fn time_scale(cfg: &RunConfig, spectra: &[SingularSpectrum]) -> Result<f64, RunError> {
    if cfg.time_units == TimeUnits::Raw {
        return Ok(1.0);
    }
    let spacings: Vec<f64> =
        spectra.iter().filter(|s| s.len() >= 2).map(|s| (s.max() - s.values()[0]) / (s.len() - 1) as f64).collect();
    let m = mean_stderr(&spacings).mean;
    if !(m > 0.0) {
        return Err(RunError::Numeric(krylov_svd::Error::InsufficientData(
            "mean level spacing is zero; use raw time units".into(),
        )));
    }
    Ok(m)
}

/// Thermal chain with the Boltzmann weights taken on the raw spectrum and the
/// nodes measured in units of `spacing`.
fn thermal_chain_in_units(s: &SingularSpectrum, beta: f64, spacing: f64) -> krylov_svd::Result<LanczosCoefficients> {
    let w = thermal_weights(s.values(), beta)?;
    let nodes: Vec<f64> = s.values().iter().map(|x| x / spacing).collect();
    lanczos_spectral(&nodes, &w)
}

fn curve_csv(c: &EnsembleCurve) -> Csv {
    let mut csv = Csv::new(&["t", "ks_mean", "ks_stderr", "n_realizations"]);
    for i in 0..c.times.len() {
        csv.row(&[Cell::F(c.times[i]), Cell::F(c.mean[i]), Cell::F(c.stderr[i]), Cell::I(c.n_realizations as u64)]);
    }
    csv
}

#[derive(Serialize)]
struct CurveSummary {
    beta_temperature: f64,
    plateau: f64,
    plateau_window: (f64, f64),
    peak: Option<Peak>,
    chain_length: (usize, usize),
    mean_spacing: f64,
}

fn ensemble_curve(
    cfg: &RunConfig,
    spectra: &[SingularSpectrum],
    beta: f64,
    spacing: f64,
) -> Result<(EnsembleCurve, CurveSummary), RunError> {
    let times = cfg.time_grid.times()?;
    let curves = per_realization(cfg, |i| {
        complexity_curve(&thermal_chain_in_units(&spectra[i], beta, spacing)?, &times, cfg.normalization)
    })?;
    let curve = EnsembleCurve::from_curves(&curves)?;
    let window = cfg.plateau_window_abs();
    let summary = CurveSummary {
        beta_temperature: beta,
        plateau: curve.plateau(window)?,
        plateau_window: window,
        peak: curve.peak(window, 2.0)?,
        chain_length: curve.chain_length,
        mean_spacing: spacing,
    };
    Ok((curve, summary))
}

pub fn density(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let pooled: Vec<f64> = spectra(cfg)?.into_iter().flat_map(|s| s.into_values()).collect();
    let hi = pooled.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let mut hist = Histogram::freedman_diaconis(&pooled, 0.0, hi)?;
    hist.add(&pooled);
    let rho = hist.density()?;
    let theory = is_ginibre(&cfg.ensemble.kind);
    let mut csv = Csv::new(&["sigma", "rho_hist", "rho_theory"]);
    for (s, r) in rho.grid.iter().zip(&rho.rho) {
        csv.row(&[Cell::F(*s), Cell::F(*r), Cell::F(if theory { quadrant_law(*s) } else { f64::NAN })]);
    }
    out.csv("density.csv", csv)?;
    let l2 = theory.then(|| rho.l2_against(quadrant_law));
    out.json("density.json", &json!({ "bins": hist.counts.len(), "samples": hist.total, "l2_vs_theory": l2 }))
}

pub fn lanczos(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let chains = match cfg.initial_state() {
        InitialState::E0 => per_realization(cfg, |i| e0_chain(&cfg.ensemble.sample(i)?))?,
        InitialState::Thermal => per_realization(cfg, |i| {
            thermal_chain_in_units(&realization_spectrum(&cfg.ensemble, i)?, cfg.beta_temperature, 1.0)
        })?,
    };
    let avg = EnsembleCoefficients::from_runs(&chains)?;
    let k = avg.a.len();
    let theory = if is_ginibre(&cfg.ensemble.kind) && k > EDGE_ORDER {
        let edge = quadrant_edge_coefficients(EDGE_ORDER)?;
        let x: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let bulk =
            BulkProfile::from_fn(x, |t| (1.0 - BULK_P * t.powf(BULK_Q), 0.5 * (1.0 - t.powf(BULK_GAMMA)).sqrt()))?;
        Some(pad_coefficients(&edge, &bulk, k, EDGE_ORDER)?)
    } else {
        None
    };
    let nan = f64::NAN;
    let mut csv = Csv::new(&["n", "a_mean", "a_stderr", "b_mean", "b_stderr", "a_theory", "b_theory"]);
    for n in 0..k {
        let (bm, bs) = if n >= 1 { avg.b.get(n - 1).map_or((nan, nan), |m| (m.mean, m.stderr)) } else { (nan, nan) };
        let (at, bt) = match &theory {
            Some(t) => (t.a[n], if n >= 1 { t.b[n - 1] } else { nan }),
            None => (nan, nan),
        };
        csv.row(&[
            Cell::I(n as u64),
            Cell::F(avg.a[n].mean),
            Cell::F(avg.a[n].stderr),
            Cell::F(bm),
            Cell::F(bs),
            Cell::F(at),
            Cell::F(bt),
        ]);
    }
    out.csv("lanczos.csv", csv)?;

    let mean = avg.mean_coefficients()?;
    let d = mean.krylov_dim();
    let mut profile = Csv::new(&["x", "a", "b"]);
    for n in 1..d {
        profile.row(&[Cell::F(n as f64 / d as f64), Cell::F(mean.a()[n]), Cell::F(mean.b()[n - 1])]);
    }
    out.csv("bulk_profile.csv", profile)?;
    let fit = fit_bulk(&mean, d)?;
    out.json(
        "bulk_fit.json",
        &json!({
            "fit": fit,
            "a0_ensemble": avg.a[0],
            "a0_moment_method": quadrant_edge_coefficients(2)?.a()[0],
            "splice_mismatch": theory.as_ref().map(|t| t.splice_mismatch),
        }),
    )
}

pub fn complexity(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let spectra = spectra(cfg)?;
    let spacing = time_scale(cfg, &spectra)?;
    let (curve, summary) = ensemble_curve(cfg, &spectra, cfg.beta_temperature, spacing)?;
    out.csv("complexity.csv", curve_csv(&curve))?;
    out.json("summary.json", &summary)
}

pub fn spacing(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let stats = per_realization(cfg, |i| spacing_ratios(&realization_spectrum(&cfg.ensemble, i)?))?;
    let s = pool_spacing(&stats)?;
    out.json(
        "spacing.json",
        &json!({ "mean_r": s.mean_r, "n_ratios": s.n_ratios, "n_dropped_degenerate": s.n_dropped_degenerate }),
    )?;
    out.json("spacing_stderr.json", &json!({ "stderr": s.stderr, "realizations": stats.len() }))
}

fn tag(beta: f64) -> String {
    format!("{beta}")
}

pub fn analytic2x2(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let times = cfg.time_grid.times()?;
    let classes = cfg.mc_classes();
    let mut columns = vec![];
    let mut summaries = vec![];
    for &class in &classes {
        let spec =
            EnsembleSpec::new(EnsembleKind::Class2x2 { class }, 2, cfg.ensemble.seed, cfg.ensemble.realizations)?;
        let sub = RunConfig { ensemble: spec, ..cfg.clone() };
        let spectra = spectra(&sub)?;
        let gaps: Vec<f64> = spectra.iter().map(|s| s.values()[1] - s.values()[0]).collect();
        let unit = mean_stderr(&gaps).mean;
        // Two levels from the uniform state: K_S(t) = sin²(b t), b = gap/2.
        let curves = per_realization(&sub, |i| {
            complexity_curve(
                &thermal_chain_in_units(&spectra[i], 0.0, unit)?,
                &times,
                krylov_svd::krylov::Normalization::Raw,
            )
        })?;
        let curve = EnsembleCurve::from_curves(&curves)?;
        let beta = class.dyson_index();
        let worst = times
            .iter()
            .enumerate()
            .map(|(k, &t)| {
                let theory = ks_2x2_or_poisson(t, beta)?;
                Ok(if curve.stderr[k] > 0.0 { (curve.mean[k] - theory).abs() / curve.stderr[k] } else { 0.0 })
            })
            .collect::<krylov_svd::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        summaries.push(json!({ "class": class, "dyson_index": beta, "worst_deviation_stderr": worst }));
        columns.push((class, curve));
    }
    let mut header = vec!["t".to_string()];
    header.extend(cfg.betas.iter().map(|b| format!("ks_beta_{}", tag(*b))));
    for (class, _) in &columns {
        header.push(format!("ks_mc_{class}"));
        header.push(format!("ks_mc_stderr_{class}"));
    }
    let mut csv = Csv::with_header(header);
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![Cell::F(t)];
        for &b in &cfg.betas {
            row.push(Cell::F(ks_2x2_or_poisson(t, b)?));
        }
        for (_, c) in &columns {
            row.push(Cell::F(c.mean[k]));
            row.push(Cell::F(c.stderr[k]));
        }
        csv.row(&row);
    }
    out.csv("analytic.csv", csv)?;
    out.json("analytic.json", &json!({ "samples": cfg.ensemble.realizations, "classes": summaries }))
}

pub fn peakscan(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let mut csv = Csv::new(&["beta", "t_max", "k_max", "has_peak"]);
    for &b in &cfg.betas {
        let r = peak_scan(b)?;
        csv.row(&[Cell::F(r.beta), Cell::F(r.t_max), Cell::F(r.k_max), Cell::B(r.has_peak)]);
    }
    out.csv("peakscan.csv", csv)?;
    out.json("peakscan.json", &json!({ "beta_min": find_beta_min()? }))
}

pub fn syk(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let spectra = spectra(cfg)?;
    let spacing = time_scale(cfg, &spectra)?;
    let mut summaries = vec![];
    for beta in cfg.thermal_betas() {
        let (curve, summary) = ensemble_curve(cfg, &spectra, beta, spacing)?;
        out.csv(&format!("complexity_beta_{}.csv", tag(beta)), curve_csv(&curve))?;
        summaries.push(summary);
    }
    let EnsembleKind::NHSYK { n_majorana } = cfg.ensemble.kind else { unreachable!("validated") };
    let class = SymmetryClass::of_nhsyk(n_majorana);
    out.json(
        "summary.json",
        &json!({
            "n_majorana": n_majorana,
            "block_dim": cfg.ensemble.dim,
            "class": class,
            "dyson_index": class.dyson_index(),
            "curves": summaries,
        }),
    )
}

pub fn hermitize(cfg: &RunConfig, out: &mut Artifacts) -> Result<(), RunError> {
    let spectra = spectra(cfg)?;
    let spacing = time_scale(cfg, &spectra)?;
    let chains = per_realization(cfg, |i| hermitized_chain(&spectra[i]))?;
    let avg = EnsembleCoefficients::from_runs(&chains)?;
    let k = avg.a.len();
    let theory = is_ginibre(&cfg.ensemble.kind);
    let nan = f64::NAN;
    let mut csv = Csv::new(&["n", "a_mean", "a_stderr", "b_mean", "b_stderr", "a_theory", "b_theory"]);
    for n in 0..k {
        let (bm, bs) = if n >= 1 { avg.b.get(n - 1).map_or((nan, nan), |m| (m.mean, m.stderr)) } else { (nan, nan) };
        let (at, bt) = match (theory, n) {
            (true, 0) => (0.0, nan),
            (true, _) => (0.0, (1.0 - n as f64 / k as f64).sqrt()),
            _ => (nan, nan),
        };
        csv.row(&[
            Cell::I(n as u64),
            Cell::F(avg.a[n].mean),
            Cell::F(avg.a[n].stderr),
            Cell::F(bm),
            Cell::F(bs),
            Cell::F(at),
            Cell::F(bt),
        ]);
    }
    out.csv("lanczos.csv", csv)?;

    let times = cfg.time_grid.times()?;
    let curves = per_realization(cfg, |i| {
        let l = &chains[i];
        let scaled = LanczosCoefficients::new(
            l.a().iter().map(|x| x / spacing).collect(),
            l.b().iter().map(|x| x / spacing).collect(),
        )?;
        complexity_curve(&scaled, &times, cfg.normalization)
    })?;
    let curve = EnsembleCurve::from_curves(&curves)?;
    out.csv("complexity.csv", curve_csv(&curve))?;

    let h = cfg.ensemble.sample(0)?;
    let d = h.dim();
    let uniform = vec![c64::new(1.0 / (d as f64).sqrt(), 0.0); d];
    let report = restricted_equivalence_check(&h, &uniform)?;
    let s = singular_values(&h)?;
    out.json(
        "equivalence.json",
        &json!({ "realization": 0, "max_deviation": report.max_deviation, "moments": report.doubled, "sigma_max": s.max() }),
    )
}
