//! Seeded random-matrix ensembles.
//!
//! Every sampler consumes an explicit RNG; [`EnsembleSpec::sample`] ties the
//! stream of realization `i` to `(seed, i)` through [`crate::seed`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{c64, CMatrix};
use crate::seed::realization_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GinibreKind {
    GinOE,
    GinUE,
    GinSE,
}

/// The five non-Hermitian symmetry classes with 2×2 samplers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymmetryClass {
    A,
    AI,
    AIdag,
    AII,
    AIIdag,
}

impl SymmetryClass {
    pub const ALL: [SymmetryClass; 5] = [Self::A, Self::AI, Self::AIdag, Self::AII, Self::AIIdag];

    /// Dyson index of the singular-value repulsion.
    pub fn dyson_index(self) -> f64 {
        match self {
            Self::AI | Self::AIdag => 1.0,
            Self::A => 2.0,
            Self::AII | Self::AIIdag => 4.0,
        }
    }

    /// Hard-edge exponent of the singular-value density near zero.
    pub fn hard_edge_exponent(self) -> f64 {
        match self {
            Self::AI => 0.0,
            Self::A | Self::AIdag | Self::AIIdag => 1.0,
            Self::AII => 3.0,
        }
    }

    /// Whether the complex representation carries Kramers-degenerate singular values.
    pub fn kramers_paired(self) -> bool {
        matches!(self, Self::AII | Self::AIIdag)
    }

    /// Class realised by the parity block of the non-Hermitian SYK model with `n` Majoranas.
    pub fn of_nhsyk(n_majorana: usize) -> SymmetryClass {
        match n_majorana % 8 {
            0 => Self::AIdag,
            4 => Self::AIIdag,
            _ => Self::A,
        }
    }
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::A => "A",
            Self::AI => "AI",
            Self::AIdag => "AIdag",
            Self::AII => "AII",
            Self::AIIdag => "AIIdag",
        };
        f.write_str(s)
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "A" => Ok(Self::A),
            "AI" => Ok(Self::AI),
            "AIdag" | "AI†" => Ok(Self::AIdag),
            "AII" => Ok(Self::AII),
            "AIIdag" | "AII†" => Ok(Self::AIIdag),
            other => Err(Error::InvalidParameter(format!("unknown symmetry class tag '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EnsembleKind {
    GinOE,
    GinUE,
    GinSE,
    #[serde(rename = "diag_poisson")]
    DiagPoisson,
    Interpolating {
        nu: f64,
    },
    NHSYK {
        n_majorana: usize,
    },
    Class2x2 {
        class: SymmetryClass,
    },
}

impl EnsembleKind {
    /// Whether singular values come in exact Kramers pairs that should be
    /// reported once.
    pub fn kramers_paired(&self) -> bool {
        match self {
            Self::GinSE => true,
            Self::NHSYK { n_majorana } => SymmetryClass::of_nhsyk(*n_majorana) == SymmetryClass::AIIdag,
            Self::Class2x2 { class } => class.kramers_paired(),
            _ => false,
        }
    }
}

/// Declarative description of an ensemble run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub kind: EnsembleKind,
    /// Logical dimension `d`. For GinSE and the quaternionic 2×2 classes the
    /// sampled complex matrix has dimension `2d`.
    pub dim: usize,
    pub seed: u64,
    pub realizations: usize,
}

impl EnsembleSpec {
    /// Validates the parameters. The dimension is forced to 2 for the 2×2
    /// classes and to `2^{N/2-1}` for the SYK parity block.
    pub fn new(kind: EnsembleKind, dim: usize, seed: u64, realizations: usize) -> Result<Self> {
        if realizations == 0 {
            return Err(Error::InvalidParameter("realizations must be at least 1".into()));
        }
        let dim = match &kind {
            EnsembleKind::Class2x2 { .. } => 2,
            EnsembleKind::NHSYK { n_majorana } => {
                validate_majorana_count(*n_majorana)?;
                1usize << (n_majorana / 2 - 1)
            }
            EnsembleKind::Interpolating { nu } => {
                validate_nu(*nu)?;
                dim
            }
            _ => dim,
        };
        if dim == 0 {
            return Err(Error::InvalidDimension("dimension must be at least 1".into()));
        }
        Ok(Self { kind, dim, seed, realizations })
    }

    /// Dimension of the sampled complex matrix.
    pub fn matrix_dim(&self) -> usize {
        match self.kind {
            EnsembleKind::GinSE => 2 * self.dim,
            EnsembleKind::Class2x2 { class } if class.kramers_paired() => 4,
            _ => self.dim,
        }
    }

    /// Realization `index`, a pure function of `(seed, index)`.
    pub fn sample(&self, index: usize) -> Result<CMatrix> {
        let mut rng = realization_rng(self.seed, index as u64);
        match &self.kind {
            EnsembleKind::GinOE => sample_ginibre(GinibreKind::GinOE, self.dim, &mut rng),
            EnsembleKind::GinUE => sample_ginibre(GinibreKind::GinUE, self.dim, &mut rng),
            EnsembleKind::GinSE => sample_ginibre(GinibreKind::GinSE, self.dim, &mut rng),
            EnsembleKind::DiagPoisson => sample_interpolating(0.0, self.dim, &mut rng),
            EnsembleKind::Interpolating { nu } => sample_interpolating(*nu, self.dim, &mut rng),
            EnsembleKind::NHSYK { n_majorana } => build_nhsyk(*n_majorana, &mut rng),
            EnsembleKind::Class2x2 { class } => Ok(sample_class_2x2(*class, &mut rng)),
        }
    }
}

fn validate_nu(nu: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(Error::InvalidParameter(format!("nu must lie in [0, 1], got {nu}")));
    }
    Ok(())
}

fn validate_majorana_count(n: usize) -> Result<()> {
    if !n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("number of Majoranas must be even, got {n}")));
    }
    if n < 4 {
        return Err(Error::InvalidParameter(format!("quartic SYK needs at least 4 Majoranas, got {n}")));
    }
    if n > 30 {
        return Err(Error::InvalidParameter(format!("N = {n} exceeds the dense-storage limit")));
    }
    Ok(())
}

#[inline]
fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// Complex Gaussian with `E|z|² = variance`.
#[inline]
fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> c64 {
    let s = (0.5 * variance).sqrt();
    let re = normal(rng);
    let im = normal(rng);
    c64::new(s * re, s * im)
}

/// Row-major sampling of a `d × d` block.
fn complex_block<R: Rng + ?Sized>(rng: &mut R, d: usize, variance: f64) -> Vec<c64> {
    (0..d * d).map(|_| complex_normal(rng, variance)).collect()
}

/// Embeds quaternion blocks as `[[A, B], [−B*, A*]]` (both `d × d`, row-major).
fn quaternion_embedding(d: usize, a: &[c64], b: &[c64]) -> CMatrix {
    CMatrix::from_fn(2 * d, |i, j| match (i < d, j < d) {
        (true, true) => a[i * d + j],
        (true, false) => b[i * d + (j - d)],
        (false, true) => -b[(i - d) * d + j].conj(),
        (false, false) => a[(i - d) * d + (j - d)].conj(),
    })
}

pub fn sample_ginibre<R: Rng + ?Sized>(kind: GinibreKind, d: usize, rng: &mut R) -> Result<CMatrix> {
    if d == 0 {
        return Err(Error::InvalidDimension("Ginibre dimension must be at least 1".into()));
    }
    let var = 1.0 / d as f64;
    Ok(match kind {
        GinibreKind::GinOE => {
            let s = var.sqrt();
            let e: Vec<f64> = (0..d * d).map(|_| s * normal(rng)).collect();
            CMatrix::from_fn(d, |i, j| c64::new(e[i * d + j], 0.0))
        }
        GinibreKind::GinUE => {
            let e = complex_block(rng, d, var);
            CMatrix::from_fn(d, |i, j| e[i * d + j])
        }
        GinibreKind::GinSE => {
            // Each quaternion entry carries total variance 1/d split over its
            // two complex components, so the distinct singular values fill [0, 2].
            let a = complex_block(rng, d, 0.5 * var);
            let b = complex_block(rng, d, 0.5 * var);
            quaternion_embedding(d, &a, &b)
        }
    })
}

/// `(1 − ν) P + ν Q` with `P` complex-Gaussian diagonal (`E|P_nn|² = 1`) and
/// `Q` drawn from GinUE. Both are always drawn, `P` first, so realizations
/// with different `ν` but equal seeds are coupled.
pub fn sample_interpolating<R: Rng + ?Sized>(nu: f64, d: usize, rng: &mut R) -> Result<CMatrix> {
    validate_nu(nu)?;
    if d == 0 {
        return Err(Error::InvalidDimension("dimension must be at least 1".into()));
    }
    let p: Vec<c64> = (0..d).map(|_| complex_normal(rng, 1.0)).collect();
    let q = complex_block(rng, d, 1.0 / d as f64);
    if nu == 0.0 {
        return Ok(CMatrix::from_diagonal(&p));
    }
    Ok(CMatrix::from_fn(d, |i, j| {
        let diag = if i == j { p[i] * (1.0 - nu) } else { c64::new(0.0, 0.0) };
        diag + q[i * d + j] * nu
    }))
}

/// A matrix with exactly one nonzero per row: `M[r, col[r]] = coeff[r]`.
/// Products of Jordan–Wigner Majoranas stay in this form.
#[derive(Clone, Debug, PartialEq)]
pub struct MonomialMatrix {
    pub col: Vec<usize>,
    pub coeff: Vec<c64>,
}

impl MonomialMatrix {
    pub fn dim(&self) -> usize {
        self.col.len()
    }

    pub fn mul(&self, rhs: &MonomialMatrix) -> MonomialMatrix {
        let (col, coeff) = (0..self.dim())
            .map(|r| {
                let k = self.col[r];
                (rhs.col[k], self.coeff[r] * rhs.coeff[k])
            })
            .unzip();
        MonomialMatrix { col, coeff }
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim());
        for r in 0..self.dim() {
            m.set(r, self.col[r], self.coeff[r]);
        }
        m
    }
}

/// Jordan–Wigner Majoranas on `n/2` sites, normalized so `{ψ_a, ψ_b} = δ_ab`.
///
/// Site `k` is bit `k` of the basis index; `ψ_{2k} = Z…Z X_k / √2` and
/// `ψ_{2k+1} = Z…Z Y_k / √2` with the Z string on sites `< k`.
pub fn jordan_wigner_majoranas(n: usize) -> Result<Vec<MonomialMatrix>> {
    validate_majorana_count(n)?;
    let sites = n / 2;
    let dim = 1usize << sites;
    let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let k = a / 2;
        let is_y = a % 2 == 1;
        let mask = 1usize << k;
        let (col, coeff) = (0..dim)
            .map(|r| {
                let string = if (r & (mask - 1)).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
                let local = if !is_y {
                    c64::new(1.0, 0.0)
                } else if r & mask == 0 {
                    c64::new(0.0, -1.0)
                } else {
                    c64::new(0.0, 1.0)
                };
                (r ^ mask, local * (string * inv_sqrt2))
            })
            .unzip();
        out.push(MonomialMatrix { col, coeff });
    }
    Ok(out)
}

/// Quartic non-Hermitian SYK model `Σ_{a<b<c<d} (J + iM) ψ_a ψ_b ψ_c ψ_d`.
#[derive(Clone, Debug, PartialEq)]
pub struct SykModel {
    pub n_majorana: usize,
    /// `(J, M)` for each quartet in lexicographic order of `(a, b, c, d)`.
    pub couplings: Vec<(f64, f64)>,
}

impl SykModel {
    pub fn quartets(n: usize) -> impl Iterator<Item = [usize; 4]> {
        (0..n).flat_map(move |a| {
            (a + 1..n).flat_map(move |b| (b + 1..n).flat_map(move |c| (c + 1..n).map(move |d| [a, b, c, d])))
        })
    }

    /// Draws `J` and `M` (in that order per quartet) with variance `6/N³`.
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        validate_majorana_count(n)?;
        let s = (6.0 / (n as f64).powi(3)).sqrt();
        let couplings = Self::quartets(n)
            .map(|_| {
                let j = s * normal(rng);
                let m = s * normal(rng);
                (j, m)
            })
            .collect();
        Ok(Self { n_majorana: n, couplings })
    }

    pub fn with_couplings(n: usize, couplings: Vec<(f64, f64)>) -> Result<Self> {
        validate_majorana_count(n)?;
        let expected = Self::quartets(n).count();
        if couplings.len() != expected {
            return Err(Error::InvalidParameter(format!(
                "expected {expected} couplings for N = {n}, got {}",
                couplings.len()
            )));
        }
        Ok(Self { n_majorana: n, couplings })
    }

    pub fn hilbert_dim(&self) -> usize {
        1 << (self.n_majorana / 2)
    }

    pub fn block_dim(&self) -> usize {
        self.hilbert_dim() / 2
    }

    /// Accumulates the Hamiltonian, keeping only rows accepted by `row_index`,
    /// which maps a computational-basis state to its position in the output.
    fn assemble(&self, out_dim: usize, row_index: impl Fn(usize) -> Option<usize>) -> Result<CMatrix> {
        let n = self.n_majorana;
        let psi = jordan_wigner_majoranas(n)?;
        let mut pairs = vec![None; n * n];
        for a in 0..n {
            for b in a + 1..n {
                pairs[a * n + b] = Some(psi[a].mul(&psi[b]));
            }
        }
        let pair = |a: usize, b: usize| pairs[a * n + b].as_ref().expect("pair a < b is populated");
        let mut h = CMatrix::zeros(out_dim);
        for ([a, b, c, d], &(j, m)) in Self::quartets(n).zip(&self.couplings) {
            let term = pair(a, b).mul(pair(c, d));
            let g = c64::new(j, m);
            for r in 0..term.dim() {
                if let (Some(i), Some(k)) = (row_index(r), row_index(term.col[r])) {
                    let v = h.get(i, k) + g * term.coeff[r];
                    h.set(i, k, v);
                }
            }
        }
        Ok(h)
    }

    pub fn full_hamiltonian(&self) -> Result<CMatrix> {
        self.assemble(self.hilbert_dim(), Some)
    }

    /// Restriction to the even fermion-parity sector (even popcount), basis
    /// ordered by ascending computational index.
    pub fn parity_block(&self) -> Result<CMatrix> {
        let dim = self.hilbert_dim();
        let mut position = vec![None; dim];
        let mut next = 0;
        for (s, slot) in position.iter_mut().enumerate() {
            if s.count_ones() % 2 == 0 {
                *slot = Some(next);
                next += 1;
            }
        }
        self.assemble(next, |s| position[s])
    }
}

/// Diagonal Jordan–Wigner parity operator `(−1)^{popcount}`.
pub fn parity_operator(n: usize) -> CMatrix {
    let dim = 1usize << (n / 2);
    let d: Vec<c64> = (0..dim).map(|s| c64::new(if s.count_ones() % 2 == 0 { 1.0 } else { -1.0 }, 0.0)).collect();
    CMatrix::from_diagonal(&d)
}

/// Samples the non-Hermitian SYK model and returns its even-parity block of
/// dimension `2^{N/2−1}`.
pub fn build_nhsyk<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CMatrix> {
    SykModel::sample(n, rng)?.parity_block()
}

/// Real symmetric 2×2 GOE draw (diagonal variance 2, off-diagonal 1), row-major.
fn goe2<R: Rng + ?Sized>(rng: &mut R) -> [f64; 4] {
    let x: [f64; 4] = std::array::from_fn(|_| normal(rng));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let off = s * (x[1] + x[2]);
    [2.0 * s * x[0], off, off, 2.0 * s * x[3]]
}

/// 2×2 quaternion-self-dual GSE draw as a 4×4 complex matrix.
fn gse2<R: Rng + ?Sized>(rng: &mut R) -> CMatrix {
    let x = complex_block(rng, 2, 1.0);
    let y = complex_block(rng, 2, 1.0);
    // A Hermitian, B antisymmetric: diagonal quaternion entries real.
    let a: Vec<c64> = (0..4)
        .map(|k| {
            let (i, j) = (k / 2, k % 2);
            (x[i * 2 + j] + x[j * 2 + i].conj()) * 0.5
        })
        .collect();
    let b: Vec<c64> = (0..4)
        .map(|k| {
            let (i, j) = (k / 2, k % 2);
            (y[i * 2 + j] - y[j * 2 + i]) * 0.5
        })
        .collect();
    quaternion_embedding(2, &a, &b)
}

/// One draw from the 2×2 sampler of `class`. Quaternionic classes return
/// their 4×4 complex representation.
pub fn sample_class_2x2<R: Rng + ?Sized>(class: SymmetryClass, rng: &mut R) -> CMatrix {
    match class {
        SymmetryClass::A => {
            let e = complex_block(rng, 2, 1.0);
            CMatrix::from_fn(2, |i, j| e[i * 2 + j])
        }
        SymmetryClass::AI => {
            let e: [f64; 4] = std::array::from_fn(|_| normal(rng));
            CMatrix::from_fn(2, |i, j| c64::new(e[i * 2 + j], 0.0))
        }
        SymmetryClass::AIdag => {
            let g1 = goe2(rng);
            let g2 = goe2(rng);
            CMatrix::from_fn(2, |i, j| c64::new(g1[i * 2 + j], g2[i * 2 + j]))
        }
        SymmetryClass::AII => {
            let a = complex_block(rng, 2, 1.0);
            let b = complex_block(rng, 2, 1.0);
            quaternion_embedding(2, &a, &b)
        }
        SymmetryClass::AIIdag => {
            let g1 = gse2(rng);
            let g2 = gse2(rng);
            g1.add(&g2.scale(c64::new(0.0, 1.0)))
        }
    }
}
