//! Parallel realization loops and the per-realization pipelines shared by the
//! CLI and the test suites.
//!
//! Realizations are mapped in parallel but always collected in index order;
//! every reduction downstream is a sequential fold over that order, so results
//! are bit-identical for any worker count.

use faer::Mat;
use rayon::prelude::*;

use crate::decomp::{lanczos_spectral, singular_values, thermal_weights, LanczosCoefficients, SingularSpectrum};
use crate::ensembles::EnsembleSpec;
use crate::error::{Error, Result};
use crate::krylov::{complexity_curve, ComplexityCurve, Normalization};
use crate::matrix::{c64, CMatrix};

/// A realization failed; the indices that did complete are listed.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationFailure {
    pub index: usize,
    pub error: Error,
    pub completed: Vec<usize>,
}

impl std::fmt::Display for RealizationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "realization {} failed ({}); {} realizations completed", self.index, self.error, self.completed.len())
    }
}

impl std::error::Error for RealizationFailure {}

/// Maps `f` over `0..count` on `workers` threads (0 = rayon default) and
/// returns the results in index order.
pub fn map_realizations<T, F>(count: usize, workers: usize, f: F) -> std::result::Result<Vec<T>, RealizationFailure>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    let run = || (0..count).into_par_iter().map(&f).collect::<Vec<Result<T>>>();
    let results = if workers == 0 {
        run()
    } else {
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                return Err(RealizationFailure {
                    index: 0,
                    error: Error::InvalidParameter(format!("cannot start worker pool: {e}")),
                    completed: vec![],
                })
            }
        }
    };
    let completed: Vec<usize> = results.iter().enumerate().filter(|(_, r)| r.is_ok()).map(|(i, _)| i).collect();
    let mut out = Vec::with_capacity(count);
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(error) => return Err(RealizationFailure { index: i, error, completed }),
        }
    }
    Ok(out)
}

/// Singular spectrum of realization `index`, with Kramers pairs reported once.
pub fn realization_spectrum(spec: &EnsembleSpec, index: usize) -> Result<SingularSpectrum> {
    let h = spec.sample(index)?;
    let s = singular_values(&h)?;
    if spec.kind.kramers_paired() {
        s.dedup_pairs()
    } else {
        Ok(s)
    }
}

/// Singular values (ascending) and squared overlaps `|⟨v_i|e_0⟩|²` with the
/// right singular vectors. Real matrices use a real SVD.
pub fn seed_overlaps_e0(h: &CMatrix) -> Result<(Vec<f64>, Vec<f64>)> {
    h.check_finite()?;
    let d = h.dim();
    let backend = |e: faer::linalg::svd::SvdError| Error::Backend(format!("{e:?}"));
    let (sigma, w): (Vec<f64>, Vec<f64>) = if h.is_real() {
        let m = Mat::<f64>::from_fn(d, d, |i, j| h.get(i, j).re);
        let f = m.svd().map_err(backend)?;
        let s = f.S().column_vector();
        (0..d).rev().map(|k| (s[k].max(0.0), f.V()[(0, k)].powi(2))).unzip()
    } else {
        let f = h.as_mat().svd().map_err(backend)?;
        let s = f.S().column_vector();
        (0..d).rev().map(|k| (s[k].re.max(0.0), f.V()[(0, k)].norm_sqr())).unzip()
    };
    Ok((sigma, w))
}

/// Lanczos chain of `√(H†H)` seeded at `e_0`.
pub fn e0_chain(h: &CMatrix) -> Result<LanczosCoefficients> {
    let (sigma, w) = seed_overlaps_e0(h)?;
    lanczos_spectral(&sigma, &w)
}

/// Lanczos chain of `√(H†H)` seeded at the thermal state with inverse
/// temperature `beta`; depends on the singular values only.
pub fn thermal_chain(spectrum: &SingularSpectrum, beta: f64) -> Result<LanczosCoefficients> {
    let w = thermal_weights(spectrum.values(), beta)?;
    lanczos_spectral(spectrum.values(), &w)
}

pub fn thermal_complexity(
    spectrum: &SingularSpectrum,
    beta: f64,
    times: &[f64],
    normalization: Normalization,
) -> Result<ComplexityCurve> {
    complexity_curve(&thermal_chain(spectrum, beta)?, times, normalization)
}

/// Chain of the Hermitized matrix `[[0, H], [H†, 0]]` from the state
/// `(1/√d) Σ_i (u_i, 0)`: the measure puts weight `1/(2d)` on each `±σ_i`.
pub fn hermitized_chain(spectrum: &SingularSpectrum) -> Result<LanczosCoefficients> {
    let s = spectrum.values();
    let nodes: Vec<f64> = s.iter().map(|x| -x).chain(s.iter().copied()).collect();
    let w = vec![1.0; nodes.len()];
    lanczos_spectral(&nodes, &w)
}

/// Canonical basis vector `e_0`.
pub fn unit_e0(d: usize) -> Vec<c64> {
    (0..d).map(|i| c64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect()
}
