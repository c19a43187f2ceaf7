//! Evolution on the Krylov chain and spread complexity.
//!
//! `ψ(t) = e^{−iJt} e_0` is evaluated exactly from the eigendecomposition
//! `J = Q Θ Qᵀ` of the Jacobi matrix: `ψ_n(t) = Σ_k Q_nk Q_0k e^{−iθ_k t}`.

use faer::Side;
use serde::{Deserialize, Serialize};

use crate::decomp::LanczosCoefficients;
use crate::error::{Error, Result};
use crate::matrix::c64;

#[derive(Clone, Debug, PartialEq)]
pub struct KrylovWavefunction {
    pub amplitudes: Vec<c64>,
}

impl KrylovWavefunction {
    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `Σ_n n |ψ_n|²`.
    pub fn mean_position(&self) -> f64 {
        self.amplitudes.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
    }
}

/// Propagator `e^{−iJt}` restricted to the column `e_0`.
#[derive(Clone, Debug)]
pub struct JacobiPropagator {
    theta: Vec<f64>,
    /// Row-major `Q`, `k × k`.
    q: Vec<f64>,
    k: usize,
}

impl JacobiPropagator {
    pub fn new(l: &LanczosCoefficients) -> Result<Self> {
        let k = l.krylov_dim();
        let evd = l.jacobi_matrix().self_adjoint_eigen(Side::Lower).map_err(|e| Error::Backend(format!("{e:?}")))?;
        let theta = (0..k).map(|i| evd.S().column_vector()[i]).collect();
        let u = evd.U();
        let mut q = vec![0.0; k * k];
        for n in 0..k {
            for m in 0..k {
                q[n * k + m] = u[(n, m)];
            }
        }
        Ok(Self { theta, q, k })
    }

    pub fn krylov_dim(&self) -> usize {
        self.k
    }

    fn phases(&self, t: f64) -> Vec<c64> {
        (0..self.k)
            .map(|m| {
                let (s, c) = (self.theta[m] * t).sin_cos();
                c64::new(c, -s) * self.q[m]
            })
            .collect()
    }

    pub fn wavefunction(&self, t: f64) -> KrylovWavefunction {
        let p = self.phases(t);
        let amplitudes = (0..self.k)
            .map(|n| {
                let row = &self.q[n * self.k..(n + 1) * self.k];
                row.iter().zip(&p).fold(c64::new(0.0, 0.0), |acc, (&r, &z)| acc + z * r)
            })
            .collect();
        KrylovWavefunction { amplitudes }
    }

    /// `K_S(t) = Σ_n n |ψ_n(t)|²`.
    pub fn complexity(&self, t: f64) -> f64 {
        self.wavefunction(t).mean_position()
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("times must be finite".into()));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("times must be ascending".into()));
    }
    Ok(())
}

pub fn evolve(l: &LanczosCoefficients, times: &[f64]) -> Result<Vec<KrylovWavefunction>> {
    check_times(times)?;
    let p = JacobiPropagator::new(l)?;
    Ok(times.iter().map(|&t| p.wavefunction(t)).collect())
}

/// How `K_S` is scaled in a [`ComplexityCurve`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "dim", rename_all = "snake_case")]
pub enum Normalization {
    /// Plain `K_S`.
    Raw,
    /// `K_S / K` with `K` the Krylov chain length.
    ChainLength,
    /// `K_S / d` with a fixed dimension.
    Dimension(usize),
}

impl Normalization {
    fn divisor(self, chain_length: usize) -> f64 {
        match self {
            Normalization::Raw => 1.0,
            Normalization::ChainLength => chain_length as f64,
            Normalization::Dimension(d) => d as f64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexityCurve {
    pub times: Vec<f64>,
    pub ks: Vec<f64>,
    /// Chain length `K`.
    pub dim: usize,
    pub normalization: Normalization,
}

impl ComplexityCurve {
    pub fn new(times: Vec<f64>, ks: Vec<f64>, dim: usize, normalization: Normalization) -> Result<Self> {
        if times.len() != ks.len() {
            return Err(Error::InvalidInput("times and ks must have equal length".into()));
        }
        check_times(&times)?;
        Ok(Self { times, ks, dim, normalization })
    }

    /// Late-time value `(K − 1)/2` expected for a uniformly spread chain, in
    /// the curve's normalization.
    pub fn uniform_plateau(&self) -> f64 {
        (self.dim as f64 - 1.0) / 2.0 / self.normalization.divisor(self.dim)
    }
}

/// Pointwise `Σ_n n|ψ_n|²`, scaled by `normalization`.
pub fn complexity(
    wavefunctions: &[KrylovWavefunction],
    times: &[f64],
    normalization: Normalization,
) -> Result<ComplexityCurve> {
    if wavefunctions.len() != times.len() {
        return Err(Error::InvalidInput("one wavefunction per time sample is required".into()));
    }
    let dim = wavefunctions.first().map_or(0, |w| w.amplitudes.len());
    let s = normalization.divisor(dim);
    let ks = wavefunctions.iter().map(|w| w.mean_position() / s).collect();
    ComplexityCurve::new(times.to_vec(), ks, dim, normalization)
}

/// Evolution and complexity in one pass, without storing wavefunctions.
pub fn complexity_curve(
    l: &LanczosCoefficients,
    times: &[f64],
    normalization: Normalization,
) -> Result<ComplexityCurve> {
    check_times(times)?;
    let p = JacobiPropagator::new(l)?;
    let s = normalization.divisor(p.krylov_dim());
    let ks = times.iter().map(|&t| p.complexity(t) / s).collect();
    ComplexityCurve::new(times.to_vec(), ks, p.krylov_dim(), normalization)
}

/// Time average of `ks` over `[t_lo, t_hi]`: trapezoidal on the samples in the
/// window (a single sample is returned as is).
pub fn plateau_of(times: &[f64], ks: &[f64], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    let idx: Vec<usize> = (0..times.len()).filter(|&i| times[i] >= lo && times[i] <= hi).collect();
    match idx.len() {
        0 => Err(Error::InvalidParameter(format!("no samples in window [{lo}, {hi}]"))),
        1 => Ok(ks[idx[0]]),
        _ => {
            let (first, last) = (idx[0], idx[idx.len() - 1]);
            let span = times[last] - times[first];
            if span <= 0.0 {
                return Ok(idx.iter().map(|&i| ks[i]).sum::<f64>() / idx.len() as f64);
            }
            let area: f64 = idx.windows(2).map(|w| 0.5 * (ks[w[0]] + ks[w[1]]) * (times[w[1]] - times[w[0]])).sum();
            Ok(area / span)
        }
    }
}

pub fn plateau(curve: &ComplexityCurve, window: (f64, f64)) -> Result<f64> {
    plateau_of(&curve.times, &curve.ks, window)
}

/// `∂_t² K_S(0) = 2 b_1²` (zero for a single site).
pub fn ehrenfest_rate(l: &LanczosCoefficients) -> f64 {
    l.b().first().map_or(0.0, |b1| 2.0 * b1 * b1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
    /// Linear up to `split`, logarithmic beyond.
    Hybrid,
}

/// Sampling times for complexity curves.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points: usize,
    pub spacing: Spacing,
    /// End of the linear segment for [`Spacing::Hybrid`]; defaults to
    /// `t_max / 10`.
    #[serde(default)]
    pub split: Option<f64>,
    /// Fraction of points spent on the linear segment of a hybrid grid.
    #[serde(default = "default_linear_fraction")]
    pub linear_fraction: f64,
}

fn default_linear_fraction() -> f64 {
    0.5
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self { t_min: 1e-2, t_max: 1e3, points: 400, spacing: Spacing::Hybrid, split: None, linear_fraction: 0.5 }
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}

impl TimeGrid {
    pub fn linear(t_min: f64, t_max: f64, points: usize) -> Self {
        Self { t_min, t_max, points, spacing: Spacing::Linear, split: None, linear_fraction: 0.5 }
    }

    pub fn log(t_min: f64, t_max: f64, points: usize) -> Self {
        Self { t_min, t_max, points, spacing: Spacing::Log, split: None, linear_fraction: 0.5 }
    }

    pub fn hybrid(t_min: f64, split: f64, t_max: f64, points: usize, linear_fraction: f64) -> Self {
        Self { t_min, t_max, points, spacing: Spacing::Hybrid, split: Some(split), linear_fraction }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.t_min.is_finite() && self.t_max.is_finite() && self.t_min >= 0.0 && self.t_max > self.t_min;
        if !ok || self.points < 2 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs 0 <= t_min < t_max and >= 2 points, got [{}, {}] x {}",
                self.t_min, self.t_max, self.points
            )));
        }
        match self.spacing {
            Spacing::Linear => Ok(()),
            Spacing::Log if self.t_min > 0.0 => Ok(()),
            Spacing::Log => Err(Error::InvalidParameter("log spacing needs t_min > 0".into())),
            Spacing::Hybrid => {
                let split = self.split_point();
                if !(split > self.t_min && split < self.t_max) {
                    return Err(Error::InvalidParameter(format!("hybrid split {split} outside the grid")));
                }
                if !(self.linear_fraction > 0.0 && self.linear_fraction < 1.0) {
                    return Err(Error::InvalidParameter("linear_fraction must lie in (0, 1)".into()));
                }
                Ok(())
            }
        }
    }

    fn split_point(&self) -> f64 {
        self.split.unwrap_or(self.t_max / 10.0)
    }

    pub fn times(&self) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(match self.spacing {
            Spacing::Linear => linspace(self.t_min, self.t_max, self.points),
            Spacing::Log => logspace(self.t_min, self.t_max, self.points),
            Spacing::Hybrid => {
                let split = self.split_point();
                let n_lin = ((self.points as f64 * self.linear_fraction).round() as usize).clamp(1, self.points - 1);
                let mut t = linspace(self.t_min, split, n_lin + 1);
                t.pop();
                t.extend(logspace(split, self.t_max, self.points - n_lin));
                t
            }
        })
    }
}

/// Largest interior local maximum of `mean` before `before` exceeding
/// `plateau` by more than `n_sigma` standard errors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    pub index: usize,
    pub t: f64,
    pub value: f64,
    pub stderr: f64,
    /// `(value − plateau) / stderr`.
    pub significance: f64,
}

pub fn detect_peak(
    times: &[f64],
    mean: &[f64],
    stderr: &[f64],
    plateau: f64,
    before: f64,
    n_sigma: f64,
) -> Option<Peak> {
    let n = mean.len();
    (1..n.saturating_sub(1))
        .filter(|&i| times[i] < before && mean[i] >= mean[i - 1] && mean[i] >= mean[i + 1])
        .filter(|&i| mean[i] - plateau > n_sigma * stderr[i])
        .max_by(|&i, &j| mean[i].total_cmp(&mean[j]))
        .map(|i| Peak {
            index: i,
            t: times[i],
            value: mean[i],
            stderr: stderr[i],
            significance: if stderr[i] > 0.0 { (mean[i] - plateau) / stderr[i] } else { f64::INFINITY },
        })
}
