//! The `H = S Σ_h T†` factorization and Lanczos coefficients of `√(H†H)`.
//!
//! `√(H†H) = V Σ V†` is assembled from the SVD `H = U Σ V†` and never from the
//! squared matrix. `Σ_h` is its Jacobi matrix in the Krylov basis `T` seeded at
//! `v0`; `S = U V† T`, which equals `H T Σ_h⁻¹` whenever `Σ_h` is invertible and
//! stays exactly unitary when it is not.

use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, dot, norm, zero, CMatrix};

const NEGATIVE_CLIP: f64 = 1e-12;
pub const LANCZOS_TOLERANCE: f64 = 1e-10;
const FACTOR_TOLERANCE: f64 = 1e-10;

/// Ascending, non-negative singular values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    /// Sorts ascending and clips tiny negative round-off to zero.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        for &v in &values {
            if !v.is_finite() {
                return Err(Error::InvalidInput("singular values must be finite".into()));
            }
            if v < -NEGATIVE_CLIP {
                return Err(Error::InvalidInput(format!("negative singular value {v}")));
            }
        }
        for v in &mut values {
            *v = v.max(0.0);
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Collapses exact Kramers pairs `(σ, σ)` to a single value each.
    pub fn dedup_pairs(&self) -> Result<Self> {
        if !self.values.len().is_multiple_of(2) {
            return Err(Error::InvalidInput("Kramers-paired spectrum must have even length".into()));
        }
        let values = self.values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect();
        Ok(Self { values })
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { values: self.values.iter().map(|v| v * c).collect() }
    }
}

/// `H = U diag(σ) V†` with `σ` ascending and columns ordered to match.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: CMatrix,
    pub sigma: Vec<f64>,
    pub v: CMatrix,
}

impl SvdFactors {
    /// `V diag(f(σ)) V†`.
    pub fn v_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        weighted_projector_sum(&self.v, &self.sigma, f)
    }

    /// `U diag(f(σ)) U†`.
    pub fn u_function(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        weighted_projector_sum(&self.u, &self.sigma, f)
    }
}

fn weighted_projector_sum(q: &CMatrix, sigma: &[f64], f: impl Fn(f64) -> f64) -> CMatrix {
    let d = q.dim();
    let scaled = Mat::from_fn(d, d, |i, j| q.get(i, j) * f(sigma[j]));
    let prod = &scaled * q.as_mat().adjoint();
    // Symmetrize away the round-off asymmetry of the product.
    let herm = Mat::from_fn(d, d, |i, j| (prod[(i, j)] + prod[(j, i)].conj()) * 0.5);
    CMatrix::from_mat(herm).expect("square by construction")
}

fn backend(e: impl std::fmt::Debug) -> Error {
    Error::Backend(format!("{e:?}"))
}

pub fn svd(h: &CMatrix) -> Result<SvdFactors> {
    h.check_finite()?;
    let d = h.dim();
    let f = h.as_mat().svd().map_err(backend)?;
    let s = f.S().column_vector();
    // The backend orders singular values nonincreasingly; reverse to ascending.
    let sigma = (0..d).map(|k| s[d - 1 - k].re.max(0.0)).collect();
    let u = CMatrix::from_fn(d, |i, j| f.U()[(i, d - 1 - j)]);
    let v = CMatrix::from_fn(d, |i, j| f.V()[(i, d - 1 - j)]);
    Ok(SvdFactors { u, sigma, v })
}

/// Singular values only. Diagonal and real inputs take cheaper routes.
pub fn singular_values(h: &CMatrix) -> Result<SingularSpectrum> {
    h.check_finite()?;
    let d = h.dim();
    let values = if h.is_diagonal() {
        (0..d).map(|i| h.get(i, i).norm()).collect()
    } else if h.is_real() {
        let m = Mat::<f64>::from_fn(d, d, |i, j| h.get(i, j).re);
        m.singular_values().map_err(backend)?
    } else {
        h.as_mat().singular_values().map_err(backend)?
    };
    SingularSpectrum::new(values)
}

/// `√(H†H) = V Σ V†`.
pub fn polar_sqrt(h: &CMatrix) -> Result<CMatrix> {
    Ok(svd(h)?.v_function(|s| s))
}

/// Jacobi-matrix coefficients: diagonal `a_0..a_{K−1}` and strictly positive
/// off-diagonal `b_1..b_{K−1}` (stored at `b[n − 1]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LanczosCoefficients {
    a: Vec<f64>,
    b: Vec<f64>,
}

impl LanczosCoefficients {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidInput("empty Lanczos coefficient list".into()));
        }
        if b.len() + 1 != a.len() {
            return Err(Error::InvalidInput(format!(
                "need exactly K - 1 off-diagonal coefficients (K = {}, got {})",
                a.len(),
                b.len()
            )));
        }
        if a.iter().chain(&b).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Lanczos coefficients must be finite".into()));
        }
        if let Some(n) = b.iter().position(|&x| x <= 0.0) {
            return Err(Error::InvalidInput(format!("b_{} = {} is not positive", n + 1, b[n])));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    /// `b_1..b_{K−1}`.
    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn krylov_dim(&self) -> usize {
        self.a.len()
    }

    /// The first `k` sites of the chain.
    pub fn truncated(&self, k: usize) -> Self {
        let k = k.clamp(1, self.a.len());
        Self { a: self.a[..k].to_vec(), b: self.b[..k - 1].to_vec() }
    }

    /// Adds `c` to every diagonal coefficient.
    pub fn shifted(&self, c: f64) -> Self {
        Self { a: self.a.iter().map(|x| x + c).collect(), b: self.b.clone() }
    }

    pub fn jacobi_matrix(&self) -> Mat<f64> {
        let k = self.a.len();
        Mat::from_fn(k, k, |i, j| {
            if i == j {
                self.a[i]
            } else if i == j + 1 {
                self.b[j]
            } else if j == i + 1 {
                self.b[i]
            } else {
                0.0
            }
        })
    }

    /// Eigenvalues of the Jacobi matrix, ascending.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        self.jacobi_matrix().self_adjoint_eigenvalues(Side::Lower).map_err(backend)
    }
}

/// A Lanczos run together with its orthonormal Krylov basis.
#[derive(Clone, Debug)]
pub struct LanczosRun {
    pub coefficients: LanczosCoefficients,
    pub basis: Vec<Vec<c64>>,
}

struct Chain {
    a: Vec<f64>,
    b: Vec<f64>,
    basis: Vec<Vec<c64>>,
}

fn axpy(y: &mut [c64], alpha: c64, x: &[c64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Three-term recurrence from the unit vector `start`, optionally
/// reorthogonalized (two classical Gram–Schmidt passes) against `prior` and
/// the chain's own basis. Stops after `max_steps` vectors or when the
/// residual norm drops to `tol`.
fn lanczos_chain(
    op: impl Fn(&[c64]) -> Vec<c64>,
    start: Vec<c64>,
    max_steps: usize,
    reorthogonalize: bool,
    tol: f64,
    prior: &[Vec<c64>],
) -> Chain {
    let mut chain = Chain { a: Vec::new(), b: Vec::new(), basis: vec![start] };
    loop {
        let n = chain.basis.len() - 1;
        let q = &chain.basis[n];
        let mut w = op(q);
        let a_n = dot(q, &w).re;
        axpy(&mut w, c64::new(-a_n, 0.0), q);
        if n > 0 {
            axpy(&mut w, c64::new(-chain.b[n - 1], 0.0), &chain.basis[n - 1]);
        }
        if reorthogonalize {
            for _ in 0..2 {
                for p in prior.iter().chain(&chain.basis) {
                    let c = dot(p, &w);
                    axpy(&mut w, -c, p);
                }
            }
        }
        chain.a.push(a_n);
        let beta = norm(&w);
        if chain.basis.len() >= max_steps || beta <= tol {
            return chain;
        }
        chain.b.push(beta);
        let inv = 1.0 / beta;
        chain.basis.push(w.into_iter().map(|z| z * inv).collect());
    }
}

fn check_unit(v0: &[c64], d: usize) -> Result<()> {
    if v0.len() != d {
        return Err(Error::InvalidInput(format!("seed vector has length {}, expected {d}", v0.len())));
    }
    let n = norm(v0);
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("seed vector must be normalized, norm = {n}")));
    }
    Ok(())
}

/// Lanczos with basis. Terminates early when `b_n < 1e−10·‖A‖_F`.
pub fn lanczos_run(a: &CMatrix, v0: &[c64], k: usize, reorthogonalize: bool) -> Result<LanczosRun> {
    a.check_finite()?;
    let d = a.dim();
    let scale = a.frobenius_norm();
    let defect = a.hermiticity_defect();
    if defect > 1e-10 * scale.max(1.0) {
        return Err(Error::ContractViolation(format!("Lanczos requires a Hermitian matrix, ‖A − A†‖ = {defect:.3e}")));
    }
    check_unit(v0, d)?;
    if k == 0 || k > d {
        return Err(Error::InvalidParameter(format!("Krylov dimension must lie in 1..={d}, got {k}")));
    }
    let chain = lanczos_chain(|x| a.apply(x), v0.to_vec(), k, reorthogonalize, LANCZOS_TOLERANCE * scale, &[]);
    Ok(LanczosRun { coefficients: LanczosCoefficients::new(chain.a, chain.b)?, basis: chain.basis })
}

pub fn lanczos(a: &CMatrix, v0: &[c64], k: usize, reorthogonalize: bool) -> Result<LanczosCoefficients> {
    Ok(lanczos_run(a, v0, k, reorthogonalize)?.coefficients)
}

/// Lanczos coefficients of the diagonal operator `diag(nodes)` seeded at the
/// vector with squared components `weights`, i.e. the Jacobi matrix of the
/// discrete measure `Σ_i w_i δ(x − nodes_i)`.
///
/// For `A = V diag(σ) V†` and a seed with overlaps `|⟨v_i|ψ⟩|² = w_i` this
/// reproduces [`lanczos`] on `A` without touching eigenvectors.
pub fn lanczos_spectral(nodes: &[f64], weights: &[f64]) -> Result<LanczosCoefficients> {
    if nodes.is_empty() || nodes.len() != weights.len() {
        return Err(Error::InvalidInput("nodes and weights must be non-empty and of equal length".into()));
    }
    if nodes.iter().chain(weights).any(|x| !x.is_finite()) || weights.iter().any(|&w| w < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("weights sum to zero".into()));
    }
    let tol = LANCZOS_TOLERANCE * nodes.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let n = nodes.len();
    let mut basis: Vec<Vec<f64>> = vec![weights.iter().map(|w| (w / total).sqrt()).collect()];
    let mut a = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    loop {
        let k = basis.len() - 1;
        let q = &basis[k];
        for i in 0..n {
            w[i] = nodes[i] * q[i];
        }
        let a_k: f64 = q.iter().zip(&w).map(|(x, y)| x * y).sum();
        for i in 0..n {
            w[i] -= a_k * q[i];
        }
        if k > 0 {
            let (bk, prev) = (b[k - 1], &basis[k - 1]);
            for i in 0..n {
                w[i] -= bk * prev[i];
            }
        }
        for _ in 0..2 {
            for p in &basis {
                let c: f64 = p.iter().zip(&w).map(|(x, y)| x * y).sum();
                for i in 0..n {
                    w[i] -= c * p[i];
                }
            }
        }
        a.push(a_k);
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if basis.len() >= n || beta <= tol {
            break;
        }
        b.push(beta);
        basis.push(w.iter().map(|x| x / beta).collect());
    }
    LanczosCoefficients::new(a, b)
}

/// Boltzmann weights `e^{−βσ_i}/Z` (the squared overlaps of the thermal state).
pub fn thermal_weights(sigma: &[f64], beta: f64) -> Result<Vec<f64>> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("inverse temperature must be finite and >= 0, got {beta}")));
    }
    if sigma.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let smin = sigma.iter().copied().fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = sigma.iter().map(|s| (-beta * (s - smin)).exp()).collect();
    let z: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / z).collect())
}

/// `(1/√Z_β) Σ_i e^{−βσ_i/2} |v_i⟩` with `v_i` the right singular vectors.
pub fn thermal_state(h: &CMatrix, beta: f64) -> Result<Vec<c64>> {
    let f = svd(h)?;
    let w = thermal_weights(&f.sigma, beta)?;
    let d = h.dim();
    let mut psi = vec![zero(); d];
    for (j, wj) in w.iter().enumerate() {
        let amp = wj.sqrt();
        if amp == 0.0 {
            continue;
        }
        for (i, p) in psi.iter_mut().enumerate() {
            *p += f.v.get(i, j) * amp;
        }
    }
    let n = norm(&psi);
    Ok(psi.into_iter().map(|z| z / n).collect())
}

/// The factorization `H = S Σ_h T†`.
#[derive(Clone, Debug)]
pub struct TridiagonalSvd {
    pub s: CMatrix,
    /// Diagonal of `Σ_h`.
    pub diag: Vec<f64>,
    /// Off-diagonal of `Σ_h`; zero entries mark restarts after the seeded
    /// Krylov space was exhausted.
    pub offdiag: Vec<f64>,
    pub t: CMatrix,
    /// Dimension of the Krylov space of the seed.
    pub krylov_dim: usize,
    pub singular_values: SingularSpectrum,
    pub diagnostics: FactorDiagnostics,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorDiagnostics {
    pub s_unitarity: f64,
    pub t_unitarity: f64,
    pub relative_residual: f64,
}

impl TridiagonalSvd {
    pub fn sigma_h(&self) -> CMatrix {
        let d = self.diag.len();
        CMatrix::from_fn(d, |i, j| {
            let v = if i == j {
                self.diag[i]
            } else if i == j + 1 {
                self.offdiag[j]
            } else if j == i + 1 {
                self.offdiag[i]
            } else {
                0.0
            };
            c64::new(v, 0.0)
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.s.matmul(&self.sigma_h()).matmul(&self.t.adjoint())
    }

    /// Lanczos coefficients of the seeded chain (first Krylov block).
    pub fn seeded_coefficients(&self) -> LanczosCoefficients {
        let k = self.krylov_dim;
        LanczosCoefficients::new(self.diag[..k].to_vec(), self.offdiag[..k - 1].to_vec())
            .expect("seeded chain has positive off-diagonals")
    }

    /// Eigenvalues of `Σ_h` (ascending), which equal the singular values of `H`.
    pub fn sigma_h_eigenvalues(&self) -> Result<Vec<f64>> {
        let d = self.diag.len();
        let sigma_h = self.sigma_h();
        let m = Mat::<f64>::from_fn(d, d, |i, j| sigma_h.get(i, j).re);
        m.self_adjoint_eigenvalues(Side::Lower).map_err(backend)
    }
}

/// Unit vector orthogonal to `basis`: the canonical basis vector with the
/// largest residual (lowest index on ties), orthogonalized twice.
fn orthogonal_complement_vector(basis: &[Vec<c64>], d: usize) -> Vec<c64> {
    let mut residual = vec![1.0; d];
    for q in basis {
        for (r, z) in residual.iter_mut().zip(q) {
            *r -= z.norm_sqr();
        }
    }
    let mut j = 0;
    for i in 1..d {
        if residual[i] > residual[j] + 1e-12 {
            j = i;
        }
    }
    let mut w = vec![zero(); d];
    w[j] = c64::new(1.0, 0.0);
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &w);
            axpy(&mut w, -c, q);
        }
    }
    let n = norm(&w);
    w.into_iter().map(|z| z / n).collect()
}

/// Computes `H = S Σ_h T†` with `T e_0 = v0` (default `e_0`).
pub fn tridiagonalize_svd(h: &CMatrix, v0: Option<&[c64]>) -> Result<TridiagonalSvd> {
    let d = h.dim();
    let factors = svd(h)?;
    let sqrt_hh = factors.v_function(|s| s);
    let seed: Vec<c64> = match v0 {
        Some(v) => {
            check_unit(v, d)?;
            v.to_vec()
        }
        None => (0..d).map(|i| c64::new(if i == 0 { 1.0 } else { 0.0 }, 0.0)).collect(),
    };
    let sigma_max = factors.sigma.last().copied().unwrap_or(0.0);
    let tol = LANCZOS_TOLERANCE * sigma_max;

    let mut basis: Vec<Vec<c64>> = Vec::with_capacity(d);
    let mut diag = Vec::with_capacity(d);
    let mut offdiag = Vec::with_capacity(d.saturating_sub(1));
    let mut krylov_dim = 0;
    let mut start = Some(seed);
    while let Some(v) = start.take() {
        let chain = lanczos_chain(|x| sqrt_hh.apply(x), v, d - basis.len(), true, tol, &basis);
        if basis.is_empty() {
            krylov_dim = chain.a.len();
        } else {
            offdiag.push(0.0);
        }
        diag.extend(chain.a);
        offdiag.extend(chain.b);
        basis.extend(chain.basis);
        if basis.len() < d {
            start = Some(orthogonal_complement_vector(&basis, d));
        }
    }

    let t = CMatrix::from_fn(d, |i, j| basis[j][i]);
    let s = factors.u.matmul(&factors.v.adjoint()).matmul(&t);
    let mut out = TridiagonalSvd {
        s,
        diag,
        offdiag,
        t,
        krylov_dim,
        singular_values: SingularSpectrum::new(factors.sigma)?,
        diagnostics: FactorDiagnostics { s_unitarity: 0.0, t_unitarity: 0.0, relative_residual: 0.0 },
    };
    let h_norm = h.frobenius_norm();
    let residual = h.sub(&out.reconstruct()).frobenius_norm();
    out.diagnostics = FactorDiagnostics {
        s_unitarity: out.s.unitarity_defect(),
        t_unitarity: out.t.unitarity_defect(),
        relative_residual: if h_norm > 0.0 { residual / h_norm } else { residual },
    };
    let dg = out.diagnostics;
    if dg.s_unitarity > FACTOR_TOLERANCE || dg.t_unitarity > FACTOR_TOLERANCE || dg.relative_residual > FACTOR_TOLERANCE
    {
        return Err(Error::DecompositionFailure(format!(
            "‖S†S − I‖ = {:.3e}, ‖T†T − I‖ = {:.3e}, relative residual = {:.3e}",
            dg.s_unitarity, dg.t_unitarity, dg.relative_residual
        )));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::{sample_ginibre, GinibreKind};
    use crate::seed::realization_rng;

    fn re(x: f64) -> c64 {
        c64::new(x, 0.0)
    }

    fn nilpotent() -> CMatrix {
        CMatrix::from_real_row_major(2, &[0.0, 2.0, 0.0, 0.0]).unwrap()
    }

    fn ginue(d: usize, seed: u64) -> CMatrix {
        sample_ginibre(GinibreKind::GinUE, d, &mut realization_rng(seed, 0)).unwrap()
    }

    #[test]
    fn singular_values_of_small_matrices() {
        assert_eq!(singular_values(&CMatrix::identity(2)).unwrap().values(), &[1.0, 1.0]);
        let s = singular_values(&nilpotent()).unwrap();
        assert!(s.values()[0].abs() < 1e-15 && (s.values()[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn singular_values_of_hermitian_are_absolute_eigenvalues() {
        let h = ginue(12, 1);
        let herm = h.add(&h.adjoint());
        let mut expected: Vec<f64> =
            herm.as_mat().self_adjoint_eigenvalues(Side::Lower).unwrap().into_iter().map(f64::abs).collect();
        expected.sort_by(f64::total_cmp);
        let got = singular_values(&herm).unwrap();
        for (a, b) in got.values().iter().zip(&expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_paths_agree_with_general_svd() {
        let h = sample_ginibre(GinibreKind::GinOE, 20, &mut realization_rng(2, 0)).unwrap();
        let general = svd(&h).unwrap().sigma;
        for (a, b) in singular_values(&h).unwrap().values().iter().zip(&general) {
            assert!((a - b).abs() < 1e-12);
        }
        let diag = CMatrix::from_diagonal(&[c64::new(3.0, 4.0), re(-1.0), c64::new(0.0, 0.5)]);
        assert_eq!(singular_values(&diag).unwrap().values(), &[0.5, 1.0, 5.0]);
    }

    #[test]
    fn rejects_non_finite_input() {
        let mut h = CMatrix::identity(2);
        h.set(0, 1, re(f64::INFINITY));
        assert!(matches!(singular_values(&h), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn polar_sqrt_properties() {
        let p = polar_sqrt(&nilpotent()).unwrap();
        let ev = p.as_mat().self_adjoint_eigenvalues(Side::Lower).unwrap();
        assert!(ev[0].abs() < 1e-14 && (ev[1] - 2.0).abs() < 1e-14);

        let h = ginue(16, 3);
        let p = polar_sqrt(&h).unwrap();
        assert!(p.hermiticity_defect() < 1e-12);
        let hh = h.adjoint().matmul(&h);
        assert!(p.matmul(&p).sub(&hh).frobenius_norm() < 1e-10 * hh.frobenius_norm());

        let q = svd(&h).unwrap();
        let unitary = q.u.matmul(&q.v.adjoint());
        assert!(polar_sqrt(&unitary).unwrap().sub(&CMatrix::identity(16)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn lanczos_two_level_example() {
        let a = CMatrix::from_real_row_major(2, &[0.0, 0.0, 0.0, 2.0]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = lanczos(&a, &[re(s), re(s)], 2, true).unwrap();
        assert!((l.a()[0] - 1.0).abs() < 1e-14 && (l.a()[1] - 1.0).abs() < 1e-14);
        assert!((l.b()[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_terminates_immediately_on_identity() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let l = lanczos(&CMatrix::identity(2), &[re(s), c64::new(0.0, s)], 2, true).unwrap();
        assert_eq!(l.krylov_dim(), 1);
        assert!((l.a()[0] - 1.0).abs() < 1e-15);
        assert!(l.b().is_empty());
    }

    #[test]
    fn lanczos_rejects_non_hermitian_and_bad_seeds() {
        let e0 = [re(1.0), re(0.0)];
        assert!(matches!(lanczos(&nilpotent(), &e0, 2, true), Err(Error::ContractViolation(_))));
        assert!(matches!(lanczos(&CMatrix::identity(2), &[re(1.0), re(1.0)], 2, true), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn tridiagonalize_identity() {
        let f = tridiagonalize_svd(&CMatrix::identity(3), None).unwrap();
        assert!(f.s.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert!(f.t.sub(&CMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert!(f.sigma_h().sub(&CMatrix::identity(3)).frobenius_norm() < 1e-14);
        assert_eq!(f.krylov_dim, 1);
    }

    #[test]
    fn tridiagonalize_nilpotent_with_balanced_seed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let f = tridiagonalize_svd(&nilpotent(), Some(&[re(s), re(s)])).unwrap();
        assert!((f.diag[0] - 1.0).abs() < 1e-14 && (f.diag[1] - 1.0).abs() < 1e-14);
        assert!((f.offdiag[0] - 1.0).abs() < 1e-14);
        assert!(f.diagnostics.relative_residual < 1e-14);
    }

    #[test]
    fn tridiagonalize_random_ginue() {
        let h = ginue(64, 4);
        let f = tridiagonalize_svd(&h, None).unwrap();
        assert!(f.diagnostics.relative_residual < 1e-10);
        assert!(f.diagnostics.s_unitarity < 1e-10 && f.diagnostics.t_unitarity < 1e-10);
        assert_eq!(f.krylov_dim, 64);
        assert_eq!(f.t.column(0)[0], re(1.0));
        let ev = f.sigma_h_eigenvalues().unwrap();
        for (a, b) in ev.iter().zip(f.singular_values.values()) {
            assert!((a - b).abs() < 1e-10 * f.singular_values.max());
        }
    }

    #[test]
    fn tridiagonalize_rank_deficient_matrix() {
        // Rank 2 with a doubly degenerate singular value: the seeded chain is
        // short and the basis is completed by restarts.
        let h = CMatrix::from_diagonal(&[re(1.0), re(1.0), re(0.0), re(3.0)]);
        let f = tridiagonalize_svd(&h, None).unwrap();
        assert_eq!(f.krylov_dim, 1);
        assert!(f.diagnostics.relative_residual < 1e-14);
        assert!(f.diagnostics.s_unitarity < 1e-12);
    }

    #[test]
    fn hermitian_positive_definite_reduction() {
        let g = ginue(24, 5);
        let h = g.matmul(&g.adjoint()).add(&CMatrix::identity(24));
        let f = tridiagonalize_svd(&h, None).unwrap();
        let e0: Vec<c64> = (0..24).map(|i| re(if i == 0 { 1.0 } else { 0.0 })).collect();
        let l = lanczos(&h, &e0, 24, true).unwrap();
        for (x, y) in f.diag.iter().zip(l.a()) {
            assert!((x - y).abs() < 1e-10);
        }
        for (x, y) in f.offdiag.iter().zip(l.b()) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn spectral_route_matches_dense_lanczos_on_thermal_seed() {
        let h = ginue(40, 6);
        let f = svd(&h).unwrap();
        for beta in [0.0, 1.0, 5.0] {
            let psi = thermal_state(&h, beta).unwrap();
            let dense = lanczos(&polar_sqrt(&h).unwrap(), &psi, 40, true).unwrap();
            let w = thermal_weights(&f.sigma, beta).unwrap();
            let spectral = lanczos_spectral(&f.sigma, &w).unwrap();
            assert_eq!(dense.krylov_dim(), spectral.krylov_dim());
            for (x, y) in dense.a().iter().zip(spectral.a()) {
                assert!((x - y).abs() < 1e-9, "beta {beta}: {x} vs {y}");
            }
            for (x, y) in dense.b().iter().zip(spectral.b()) {
                assert!((x - y).abs() < 1e-9, "beta {beta}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn thermal_state_limits() {
        let h = ginue(4, 7);
        let f = svd(&h).unwrap();
        let psi = thermal_state(&h, 0.0).unwrap();
        for j in 0..4 {
            let overlap = dot(&f.v.column(j), &psi).norm();
            assert!((overlap - 0.5).abs() < 1e-12);
        }
        let cold = thermal_state(&h, 1e4).unwrap();
        assert!((dot(&f.v.column(0), &cold).norm() - 1.0).abs() < 1e-10);
        assert!(matches!(thermal_state(&h, -1.0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn dedup_pairs_halves_kramers_spectra() {
        let s = SingularSpectrum::new(vec![2.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(s.dedup_pairs().unwrap().values(), &[1.0, 2.0]);
        assert!(SingularSpectrum::new(vec![1.0, 2.0, 3.0]).unwrap().dedup_pairs().is_err());
        assert_eq!(SingularSpectrum::new(vec![-1e-13]).unwrap().values(), &[0.0]);
        assert!(SingularSpectrum::new(vec![-1e-6]).is_err());
    }
}
