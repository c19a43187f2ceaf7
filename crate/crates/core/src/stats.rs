//! Deterministic ensemble reductions.
//!
//! All sums are pairwise over realization order, so a reduction depends only
//! on the ordered inputs and never on how they were produced.

use serde::{Deserialize, Serialize};

use crate::decomp::LanczosCoefficients;
use crate::error::{Error, Result};
use crate::krylov::{detect_peak, plateau_of, ComplexityCurve, Peak};

pub fn pairwise_sum(x: &[f64]) -> f64 {
    const BLOCK: usize = 8;
    if x.len() <= BLOCK {
        return x.iter().sum();
    }
    let (l, r) = x.split_at(x.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeanStderr {
    pub mean: f64,
    /// Standard error of the mean (zero for a single sample).
    pub stderr: f64,
    pub n: usize,
}

pub fn mean_stderr(x: &[f64]) -> MeanStderr {
    let n = x.len();
    if n == 0 {
        return MeanStderr { mean: f64::NAN, stderr: f64::NAN, n };
    }
    let mean = pairwise_sum(x) / n as f64;
    if n == 1 {
        return MeanStderr { mean, stderr: 0.0, n };
    }
    let dev: Vec<f64> = x.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    MeanStderr { mean, stderr: (var / n as f64).sqrt(), n }
}

/// Ensemble-mean complexity curve on a shared time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCurve {
    pub times: Vec<f64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub n_realizations: usize,
    /// Chain lengths of the contributing realizations (min, max).
    pub chain_length: (usize, usize),
}

impl EnsembleCurve {
    pub fn from_curves(curves: &[ComplexityCurve]) -> Result<Self> {
        let first = curves.first().ok_or_else(|| Error::InsufficientData("no curves to average".into()))?;
        if curves.iter().any(|c| c.times != first.times) {
            return Err(Error::InvalidInput("curves must share one time grid".into()));
        }
        let n_t = first.times.len();
        let mut column = vec![0.0; curves.len()];
        let mut mean = Vec::with_capacity(n_t);
        let mut stderr = Vec::with_capacity(n_t);
        for i in 0..n_t {
            for (slot, c) in column.iter_mut().zip(curves) {
                *slot = c.ks[i];
            }
            let m = mean_stderr(&column);
            mean.push(m.mean);
            stderr.push(m.stderr);
        }
        let lo = curves.iter().map(|c| c.dim).min().unwrap_or(0);
        let hi = curves.iter().map(|c| c.dim).max().unwrap_or(0);
        Ok(Self { times: first.times.clone(), mean, stderr, n_realizations: curves.len(), chain_length: (lo, hi) })
    }

    pub fn plateau(&self, window: (f64, f64)) -> Result<f64> {
        plateau_of(&self.times, &self.mean, window)
    }

    /// Peak before the plateau window, judged against the plateau estimate.
    pub fn peak(&self, window: (f64, f64), n_sigma: f64) -> Result<Option<Peak>> {
        let p = self.plateau(window)?;
        Ok(detect_peak(&self.times, &self.mean, &self.stderr, p, window.0, n_sigma))
    }

    /// Global maximum of the mean curve before `before`, regardless of significance.
    pub fn max_before(&self, before: f64) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.mean)
            .filter(|(t, _)| **t < before)
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(t, m)| (*t, *m))
    }
}

/// Per-index mean and standard error of Lanczos coefficients over an ensemble.
/// Index `n` of `b` refers to `b_{n+1}`; realizations with shorter chains
/// simply do not contribute to the tail.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleCoefficients {
    pub a: Vec<MeanStderr>,
    pub b: Vec<MeanStderr>,
    pub n_realizations: usize,
}

impl EnsembleCoefficients {
    pub fn from_runs(runs: &[LanczosCoefficients]) -> Result<Self> {
        if runs.is_empty() {
            return Err(Error::InsufficientData("no coefficient sequences to average".into()));
        }
        let reduce = |get: &dyn Fn(&LanczosCoefficients) -> &[f64]| {
            let len = runs.iter().map(|r| get(r).len()).max().unwrap_or(0);
            (0..len)
                .map(|n| {
                    let col: Vec<f64> = runs.iter().filter_map(|r| get(r).get(n).copied()).collect();
                    mean_stderr(&col)
                })
                .collect::<Vec<_>>()
        };
        Ok(Self { a: reduce(&|r| r.a()), b: reduce(&|r| r.b()), n_realizations: runs.len() })
    }

    pub fn a_mean(&self) -> Vec<f64> {
        self.a.iter().map(|m| m.mean).collect()
    }

    pub fn b_mean(&self) -> Vec<f64> {
        self.b.iter().map(|m| m.mean).collect()
    }

    /// Mean coefficients as a Jacobi chain (length of the longest realization
    /// whose mean `b` stays positive).
    pub fn mean_coefficients(&self) -> Result<LanczosCoefficients> {
        let b = self.b_mean();
        let k = b.iter().position(|&x| x <= 0.0).unwrap_or(b.len()) + 1;
        let k = k.min(self.a.len());
        LanczosCoefficients::new(self.a_mean()[..k].to_vec(), b[..k - 1].to_vec())
    }
}
