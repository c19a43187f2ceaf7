//! The Hermitized matrix `H̃ = [[0, H], [H†, 0]]`, whose eigenpairs are
//! `±σ_i` with eigenvectors `(u_i, ±v_i)/√2` taken from the SVD of `H`.

use faer::Side;
use serde::{Deserialize, Serialize};

use crate::decomp::{lanczos, svd, LanczosCoefficients, SvdFactors};
use crate::ensembles::{sample_ginibre, GinibreKind};
use crate::error::{Error, Result};
use crate::krylov::{complexity_curve, ComplexityCurve, Normalization};
use crate::matrix::{c64, dot, CMatrix};
use crate::seed::realization_rng;
use crate::stats::{mean_stderr, MeanStderr};

#[derive(Clone, Debug)]
pub struct HermitizedPair {
    pub source: CMatrix,
    pub doubled: CMatrix,
}

impl HermitizedPair {
    /// Eigenvalues of the doubled matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.doubled.as_mat().self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Backend(format!("{e:?}")))
    }

    /// `(E, |E⟩)` for `E = ±σ_i`, paired through the SVD of the source.
    pub fn eigenpairs(&self) -> Result<Vec<(f64, Vec<c64>)>> {
        let f = svd(&self.source)?;
        let d = self.source.dim();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::with_capacity(2 * d);
        for i in 0..d {
            for s in [1.0, -1.0] {
                let v: Vec<c64> =
                    (0..d).map(|k| f.u.get(k, i) * r).chain((0..d).map(|k| f.v.get(k, i) * (s * r))).collect();
                out.push((s * f.sigma[i], v));
            }
        }
        Ok(out)
    }
}

pub fn hermitize(h: &CMatrix) -> Result<HermitizedPair> {
    h.check_finite()?;
    let d = h.dim();
    let zero = c64::new(0.0, 0.0);
    let doubled = CMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, false) => h.get(i, j - d),
        (false, true) => h.get(j, i - d).conj(),
        _ => zero,
    });
    Ok(HermitizedPair { source: h.clone(), doubled })
}

/// `(1/√d) Σ_i (u_i, 0)`, the equal superposition of all `|E_i^±⟩`.
fn superposition_state(f: &SvdFactors) -> Vec<c64> {
    let d = f.u.dim();
    let s = 1.0 / (d as f64).sqrt();
    let mut psi: Vec<c64> = (0..d).map(|k| (0..d).map(|i| f.u.get(k, i)).sum::<c64>() * s).collect();
    psi.extend(std::iter::repeat_n(c64::new(0.0, 0.0), d));
    psi
}

/// Dense Lanczos chain of the doubled matrix from the full superposition.
pub fn hermitized_lanczos(h: &CMatrix) -> Result<LanczosCoefficients> {
    let pair = hermitize(h)?;
    let psi = superposition_state(&svd(h)?);
    lanczos(&pair.doubled, &psi, 2 * h.dim(), true)
}

/// Unnormalized Hermitized complexity `K_H(t)`.
pub fn hermitized_complexity(h: &CMatrix, times: &[f64]) -> Result<ComplexityCurve> {
    complexity_curve(&hermitized_lanczos(h)?, times, Normalization::Raw)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// `⟨Ψ₊|H̃ⁿ|Ψ₊⟩` for `n = 0..=12`.
    pub doubled: Vec<f64>,
    /// `⟨Ψ_v|(√(H†H))ⁿ|Ψ_v⟩`.
    pub v_side: Vec<f64>,
    /// `⟨Ψ_u|(√(HH†))ⁿ|Ψ_u⟩`.
    pub u_side: Vec<f64>,
    pub max_deviation: f64,
}

pub const EQUIVALENCE_ORDERS: usize = 13;
pub const EQUIVALENCE_TOLERANCE: f64 = 1e-8;

fn moments(op: &CMatrix, psi: &[c64], count: usize) -> Vec<f64> {
    let mut w = psi.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(dot(psi, &w).re);
        w = op.apply(&w);
    }
    out
}

/// Compares moments of `Ψ₊ = Σ c_i |E_i^+⟩` under `H̃` with those of
/// `Ψ_v = Σ c_i |v_i⟩` under `√(H†H)` and `Ψ_u = Σ c_i |u_i⟩` under `√(HH†)`,
/// each computed by repeated matrix–vector products.
pub fn restricted_equivalence_check(h: &CMatrix, weights: &[c64]) -> Result<EquivalenceReport> {
    let d = h.dim();
    if weights.len() != d {
        return Err(Error::InvalidInput(format!("expected {d} weights, got {}", weights.len())));
    }
    let norm2: f64 = weights.iter().map(|c| c.norm_sqr()).sum();
    if (norm2 - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("weights must be normalized, Σ|c|² = {norm2}")));
    }
    let pair = hermitize(h)?;
    let f = svd(h)?;
    let combine =
        |q: &CMatrix| -> Vec<c64> { (0..d).map(|k| (0..d).map(|i| weights[i] * q.get(k, i)).sum()).collect() };
    let psi_u = combine(&f.u);
    let psi_v = combine(&f.v);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let psi_plus: Vec<c64> = psi_u.iter().chain(&psi_v).map(|z| z * r).collect();

    let doubled = moments(&pair.doubled, &psi_plus, EQUIVALENCE_ORDERS);
    let v_side = moments(&f.v_function(|s| s), &psi_v, EQUIVALENCE_ORDERS);
    let u_side = moments(&f.u_function(|s| s), &psi_u, EQUIVALENCE_ORDERS);

    let mut max_deviation = 0.0f64;
    let mut worst = 0;
    for n in 0..EQUIVALENCE_ORDERS {
        let scale = doubled[n].abs().max(f64::MIN_POSITIVE);
        let dev = ((doubled[n] - v_side[n]).abs().max((doubled[n] - u_side[n]).abs())) / scale;
        if dev > max_deviation {
            max_deviation = dev;
            worst = n;
        }
    }
    if max_deviation > EQUIVALENCE_TOLERANCE {
        return Err(Error::EquivalenceFailure { deviation: max_deviation, order: worst });
    }
    Ok(EquivalenceReport { doubled, v_side, u_side, max_deviation })
}

/// Hard-edge exponent `α` of the `d = 1` singular-value law of each Ginibre
/// kind, and the entry variance per real component.
fn d1_law(kind: GinibreKind) -> (f64, f64) {
    match kind {
        GinibreKind::GinOE => (0.0, 1.0),
        GinibreKind::GinUE => (1.0, 0.5),
        GinibreKind::GinSE => (3.0, 0.25),
    }
}

pub fn d1_alpha(kind: GinibreKind) -> f64 {
    d1_law(kind).0
}

/// Singular values of `d = 1` Ginibre draws, rescaled exactly so that they
/// follow `σ^α e^{−(2 z_α σ)²}` (mean `1/2`).
pub fn d1_singular_samples(kind: GinibreKind, count: usize, seed: u64) -> Result<Vec<f64>> {
    let (alpha, var) = d1_law(kind);
    let z = crate::special::wigner_dyson_scale(alpha);
    let scale = 1.0 / (2.0 * z * (2.0 * var).sqrt());
    (0..count)
        .map(|i| {
            let h = sample_ginibre(kind, 1, &mut realization_rng(seed, i as u64))?;
            // The quaternionic 2×2 block is a multiple of a unitary.
            let col = h.column(0);
            Ok(crate::matrix::norm(&col) * scale)
        })
        .collect()
}

/// Monte Carlo `K_H(t) = ⟨sin²(σt)⟩` at `d = 1`.
pub fn d1_complexity_mc(kind: GinibreKind, times: &[f64], count: usize, seed: u64) -> Result<Vec<MeanStderr>> {
    let s = d1_singular_samples(kind, count, seed)?;
    Ok(times
        .iter()
        .map(|&t| {
            let v: Vec<f64> = s.iter().map(|x| (x * t).sin().powi(2)).collect();
            mean_stderr(&v)
        })
        .collect())
}
