//! Singular-value statistics and the correspondence between a spectral
//! density and mean Lanczos coefficients.
//!
//! In the bulk, the mean coefficients `a(x)`, `b(x)` at `x = n/d` determine
//! the density through a superposition of local arcsine laws,
//!
//! ```text
//! ρ(σ) = ∫₀¹ dx Θ(4b² − (σ − a)²) / (π √(4b² − (σ − a)²)),
//! ```
//!
//! which [`density_from_bulk`] integrates exactly per cell and
//! [`bulk_from_density`] inverts by least squares.

use crate::dd::Dd;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::decomp::{LanczosCoefficients, SingularSpectrum};
use crate::error::{Error, Result};
use crate::optimize::{grid_then_golden_min, nelder_mead, NelderMeadOptions};
use crate::special::wigner_dyson_scale;
use crate::stats::pairwise_sum;

/// Spacings below this fraction of the largest singular value count as
/// degeneracies.
pub const DEGENERACY_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingStats {
    pub ratios: Vec<f64>,
    pub mean_r: f64,
    pub n_dropped_degenerate: usize,
}

/// Ratios `min(λ_n, λ_{n+1}) / max(λ_n, λ_{n+1})` of consecutive spacings,
/// after dropping degenerate (zero) spacings.
pub fn spacing_ratios(spectrum: &SingularSpectrum) -> Result<SpacingStats> {
    let s = spectrum.values();
    if s.len() < 3 {
        return Err(Error::InsufficientData(format!("need at least 3 singular values, got {}", s.len())));
    }
    let tol = DEGENERACY_TOL * spectrum.max();
    let all: Vec<f64> = s.windows(2).map(|w| w[1] - w[0]).collect();
    let kept: Vec<f64> = all.iter().copied().filter(|&l| l > tol).collect();
    let n_dropped_degenerate = all.len() - kept.len();
    if kept.len() < 2 {
        return Err(Error::InsufficientData("fewer than two non-degenerate spacings".into()));
    }
    let ratios: Vec<f64> = kept.windows(2).map(|w| w[0].min(w[1]) / w[0].max(w[1])).collect();
    let mean_r = pairwise_sum(&ratios) / ratios.len() as f64;
    Ok(SpacingStats { ratios, mean_r, n_dropped_degenerate })
}

/// Pooled spacing statistics over an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacingSummary {
    pub mean_r: f64,
    pub stderr: f64,
    pub n_ratios: usize,
    pub n_dropped_degenerate: usize,
}

pub fn pool_spacing(stats: &[SpacingStats]) -> Result<SpacingSummary> {
    let all: Vec<f64> = stats.iter().flat_map(|s| s.ratios.iter().copied()).collect();
    if all.is_empty() {
        return Err(Error::InsufficientData("no spacing ratios to pool".into()));
    }
    // Realizations are independent; ratios within one are only weakly
    // correlated, so the error bar uses per-realization means.
    let per: Vec<f64> = stats.iter().map(|s| s.mean_r).collect();
    let m = crate::stats::mean_stderr(&per);
    Ok(SpacingSummary {
        mean_r: pairwise_sum(&all) / all.len() as f64,
        stderr: m.stderr,
        n_ratios: all.len(),
        n_dropped_degenerate: stats.iter().map(|s| s.n_dropped_degenerate).sum(),
    })
}

/// `(1/π)√(4 − σ²)` on `[0, 2]`.
pub fn quadrant_law(sigma: f64) -> f64 {
    if (0.0..=2.0).contains(&sigma) {
        (4.0 - sigma * sigma).max(0.0).sqrt() / PI
    } else {
        0.0
    }
}

/// Cumulative distribution of [`quadrant_law`].
pub fn quadrant_cdf(sigma: f64) -> f64 {
    let s = sigma.clamp(0.0, 2.0);
    (s * (4.0 - s * s).max(0.0).sqrt() / 2.0 + 2.0 * (s / 2.0).asin()) / PI
}

/// `(1/2π)√(4 − E²)` on `[−2, 2]`.
pub fn semicircle(e: f64) -> f64 {
    if e.abs() <= 2.0 {
        (4.0 - e * e).max(0.0).sqrt() / (2.0 * PI)
    } else {
        0.0
    }
}

/// Wigner–Dyson surmise with unit mean spacing.
pub fn wigner_dyson(lambda: f64, beta: f64) -> Result<f64> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("Dyson index must be positive, got {beta}")));
    }
    if lambda < 0.0 {
        return Ok(0.0);
    }
    let z = wigner_dyson_scale(beta);
    let u = lambda * z;
    let ln_norm = statrs::function::gamma::ln_gamma(0.5 * (1.0 + beta));
    Ok(2.0 * z * (-u * u - ln_norm).exp() * u.powf(beta))
}

fn catalan_half_dd(k: usize) -> Dd {
    // C_{j+1} = C_j · 2(2j + 1)/(j + 2), started from C_0 = 1 or C_{1/2} = 8/(3π).
    let (mut c, mut j) =
        if k.is_multiple_of(2) { (Dd::from(1.0), 0.0) } else { (Dd::from(8.0) / (Dd::from(3.0) * crate::dd::PI), 0.5) };
    for _ in 0..k / 2 {
        c = c * Dd::from(2.0 * (2.0 * j + 1.0)) / Dd::from(j + 2.0);
        j += 1.0;
    }
    c
}

/// Half-integer Catalan number `C_{k/2} = 2^k Γ((k+1)/2) / (√π Γ(k/2 + 2))`,
/// the `k`-th moment of the quadrant law.
pub fn catalan_half(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        // Integer Catalan numbers via exact integer steps while they fit.
        let mut c = 1.0f64;
        for j in 0..k / 2 {
            c = c * (2.0 * (2 * j + 1) as f64) / (j + 2) as f64;
        }
        c
    } else {
        catalan_half_dd(k).to_f64()
    }
}

/// `m_0..m_{count−1}` of the quadrant law.
pub fn quadrant_moments(count: usize) -> Vec<f64> {
    (0..count).map(catalan_half).collect()
}

/// Chebyshev's algorithm from ordinary moments to Jacobi coefficients,
/// carried out in double-double arithmetic.
fn chebyshev_dd(m: &[Dd]) -> Result<LanczosCoefficients> {
    let k_max = m.len() / 2;
    if k_max == 0 {
        return Err(Error::InvalidMoments("need at least two moments".into()));
    }
    let m0 = m[0];
    if !(m0.hi() > 0.0) {
        return Err(Error::InvalidMoments("m_0 must be positive".into()));
    }
    let len = 2 * k_max;
    let mut prev: Vec<Dd> = vec![Dd::from(0.0); len];
    let mut cur: Vec<Dd> = m[..len].iter().map(|&x| x / m0).collect();
    let mut alpha = vec![cur[1] / cur[0]];
    let mut beta_sq: Vec<Dd> = vec![Dd::from(1.0)];
    for k in 1..k_max {
        let mut next = vec![Dd::from(0.0); len];
        for l in k..(len - k) {
            next[l] = cur[l + 1] - alpha[k - 1] * cur[l] - beta_sq[k - 1] * prev[l];
        }
        let b = next[k] / cur[k - 1];
        let scale = alpha[k - 1].hi() * alpha[k - 1].hi() + beta_sq[k - 1].hi().abs();
        if b.hi().abs() <= 1e-13 * scale {
            // Finite support exhausted: the measure has exactly k atoms.
            break;
        }
        if b.hi() < 0.0 {
            return Err(Error::InvalidMoments(format!(
                "Hankel matrix not positive definite at order {k} (b_{k}² = {:.3e})",
                b.hi()
            )));
        }
        alpha.push(next[k + 1] / next[k] - cur[k] / cur[k - 1]);
        beta_sq.push(b);
        prev = cur;
        cur = next;
    }
    let a = alpha.iter().map(|&x| x.to_f64()).collect();
    let b = beta_sq[1..].iter().map(|&x| x.to_f64().sqrt()).collect();
    LanczosCoefficients::new(a, b)
}

/// Jacobi coefficients `a_0..a_{K−1}`, `b_1..b_{K−1}` of the measure with
/// moments `m_0..m_{2K−1}`. Raw moments are exponentially ill-conditioned:
/// rounding the moments to double precision limits the round trip to ~1e−8
/// at K ≈ 8; use [`moments_to_lanczos_extended`] beyond that.
pub fn moments_to_lanczos(moments: &[f64]) -> Result<LanczosCoefficients> {
    if moments.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidMoments("moments must be finite".into()));
    }
    let m: Vec<Dd> = moments.iter().map(|&x| Dd::from(x)).collect();
    chebyshev_dd(&m)
}

/// A moment carried as the unevaluated sum `hi + lo` (about 32 digits).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtendedMoment {
    pub hi: f64,
    pub lo: f64,
}

impl ExtendedMoment {
    pub fn value(&self) -> f64 {
        self.hi + self.lo
    }
}

impl From<Dd> for ExtendedMoment {
    fn from(x: Dd) -> Self {
        ExtendedMoment { hi: x.hi(), lo: x.lo() }
    }
}

/// As [`moments_to_lanczos`] from double-double moments; the round trip
/// holds to ~1e−8 up to K ≈ 20.
pub fn moments_to_lanczos_extended(moments: &[ExtendedMoment]) -> Result<LanczosCoefficients> {
    if moments.iter().any(|x| !x.hi.is_finite() || !x.lo.is_finite()) {
        return Err(Error::InvalidMoments("moments must be finite".into()));
    }
    let m: Vec<Dd> = moments.iter().map(|x| Dd::from_parts(x.hi, x.lo)).collect();
    chebyshev_dd(&m)
}

/// Quadrant-law moments `C_{k/2}` in double-double.
pub fn quadrant_moments_extended(count: usize) -> Vec<ExtendedMoment> {
    (0..count).map(|k| catalan_half_dd(k).into()).collect()
}

/// Edge coefficients of the quadrant law from its exact moments.
pub fn quadrant_edge_coefficients(k: usize) -> Result<LanczosCoefficients> {
    moments_to_lanczos_extended(&quadrant_moments_extended(2 * k.max(1)))
}

fn jacobi_power_iteration<T: Copy + std::ops::Add<Output = T> + std::ops::Mul<Output = T>>(
    a: &[T],
    b: &[T],
    zero: T,
    one: T,
    count: usize,
) -> Vec<T> {
    let n = a.len();
    let mut v = vec![zero; n];
    v[0] = one;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(v[0]);
        let w: Vec<T> = (0..n)
            .map(|i| {
                let mut s = a[i] * v[i];
                if i > 0 {
                    s = s + b[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    s = s + b[i] * v[i + 1];
                }
                s
            })
            .collect();
        v = w;
    }
    out
}

/// `(J^k)_{00}` for `k < count`.
pub fn jacobi_moments(l: &LanczosCoefficients, count: usize) -> Vec<f64> {
    jacobi_power_iteration(l.a(), l.b(), 0.0, 1.0, count)
}

/// [`jacobi_moments`] accumulated in double-double.
pub fn jacobi_moments_extended(l: &LanczosCoefficients, count: usize) -> Vec<ExtendedMoment> {
    let a: Vec<Dd> = l.a().iter().map(|&x| Dd::from(x)).collect();
    let b: Vec<Dd> = l.b().iter().map(|&x| Dd::from(x)).collect();
    jacobi_power_iteration(&a, &b, Dd::from(0.0), Dd::from(1.0), count).into_iter().map(Into::into).collect()
}

/// Density sampled on an ascending grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityProfile {
    pub grid: Vec<f64>,
    pub rho: Vec<f64>,
}

impl DensityProfile {
    pub fn new(grid: Vec<f64>, rho: Vec<f64>) -> Result<Self> {
        if grid.len() != rho.len() || grid.len() < 2 {
            return Err(Error::InvalidInput("density needs >= 2 grid points and one value per point".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("density grid must be strictly ascending".into()));
        }
        if rho.iter().any(|&r| !(r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidInput("density values must be finite and non-negative".into()));
        }
        Ok(Self { grid, rho })
    }

    pub fn from_fn(grid: Vec<f64>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let rho = grid.iter().map(|&s| f(s)).collect();
        Self::new(grid, rho)
    }

    /// Trapezoidal integral.
    pub fn mass(&self) -> f64 {
        trapezoid(&self.grid, &self.rho)
    }

    /// `√(∫ (ρ − ρ')²)` on the shared grid.
    pub fn l2_distance(&self, other: &DensityProfile) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::InvalidInput("densities must share a grid".into()));
        }
        let d2: Vec<f64> = self.rho.iter().zip(&other.rho).map(|(x, y)| (x - y) * (x - y)).collect();
        Ok(trapezoid(&self.grid, &d2).sqrt())
    }

    pub fn l2_against(&self, f: impl Fn(f64) -> f64) -> f64 {
        let d2: Vec<f64> = self.grid.iter().zip(&self.rho).map(|(&s, r)| (r - f(s)).powi(2)).collect();
        trapezoid(&self.grid, &d2).sqrt()
    }
}

fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    x.windows(2).zip(y.windows(2)).map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0])).sum()
}

/// Mean coefficient profiles `a(x)`, `b(x)` on `x ∈ [0, 1]`, interpolated
/// linearly between knots.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkProfile {
    pub x: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl BulkProfile {
    pub fn new(x: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if x.is_empty() || x.len() != a.len() || x.len() != b.len() {
            return Err(Error::InvalidInput("bulk profile needs equal-length, non-empty x, a, b".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x[0] < 0.0 || x[x.len() - 1] > 1.0 {
            return Err(Error::InvalidInput("bulk profile x must ascend within [0, 1]".into()));
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) || b.iter().any(|&v| v < 0.0) {
            return Err(Error::InvalidInput("bulk profile needs finite a and non-negative b".into()));
        }
        Ok(Self { x, a, b })
    }

    pub fn from_fn(x: Vec<f64>, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (a, b) = x.iter().map(|&t| f(t)).unzip();
        Self::new(x, a, b)
    }

    /// Linear interpolation, constant beyond the end knots.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let n = self.x.len();
        if n == 1 || x <= self.x[0] {
            return (self.a[0], self.b[0]);
        }
        if x >= self.x[n - 1] {
            return (self.a[n - 1], self.b[n - 1]);
        }
        let i = self.x.partition_point(|&k| k <= x) - 1;
        let w = (x - self.x[i]) / (self.x[i + 1] - self.x[i]);
        (self.a[i] + w * (self.a[i + 1] - self.a[i]), self.b[i] + w * (self.b[i + 1] - self.b[i]))
    }
}

const FORWARD_CELLS: usize = 512;

fn bin_edges(grid: &[f64]) -> Vec<f64> {
    let n = grid.len();
    let mut e = Vec::with_capacity(n + 1);
    e.push(grid[0] - 0.5 * (grid[1] - grid[0]));
    for w in grid.windows(2) {
        e.push(0.5 * (w[0] + w[1]));
    }
    e.push(grid[n - 1] + 0.5 * (grid[n - 1] - grid[n - 2]));
    e
}

/// Forward map on bins centred at `grid`: each x-cell contributes the exact
/// bin masses of its arcsine law `σ = a + 2b sin θ`.
fn forward_density(ab: impl Fn(f64) -> (f64, f64), grid: &[f64], cells: usize) -> Vec<f64> {
    let edges = bin_edges(grid);
    let nb = grid.len();
    let mut mass = vec![0.0; nb];
    let w = 1.0 / cells as f64;
    for c in 0..cells {
        let (a, b) = ab((c as f64 + 0.5) * w);
        let b = b.max(0.0);
        if b <= 1e-14 * (1.0 + a.abs()) {
            let i = edges.partition_point(|&e| e <= a);
            if i >= 1 && i <= nb {
                mass[i - 1] += w;
            }
            continue;
        }
        let (lo, hi) = (a - 2.0 * b, a + 2.0 * b);
        let cdf = |s: f64| {
            if s <= lo {
                0.0
            } else if s >= hi {
                1.0
            } else {
                0.5 + ((s - a) / (2.0 * b)).asin() / PI
            }
        };
        let first = edges.partition_point(|&e| e <= lo).saturating_sub(1);
        let last = edges.partition_point(|&e| e < hi).min(nb);
        let mut f_prev = cdf(edges[first]);
        for i in first..last {
            let f_next = cdf(edges[i + 1]);
            mass[i] += w * (f_next - f_prev);
            f_prev = f_next;
        }
    }
    mass.iter().enumerate().map(|(i, m)| m / (edges[i + 1] - edges[i])).collect()
}

/// Density (bin averages on `sigma_grid`) implied by mean coefficient profiles.
pub fn density_from_bulk(profile: &BulkProfile, sigma_grid: &[f64]) -> Result<DensityProfile> {
    if sigma_grid.len() < 2 || sigma_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("sigma grid must be strictly ascending with >= 2 points".into()));
    }
    let rho = forward_density(|x| profile.eval(x), sigma_grid, FORWARD_CELLS);
    DensityProfile::new(sigma_grid.to_vec(), rho)
}

/// `a(x) = a0 − p x^q`, `b(x) = b0 √(1 − x^γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkFamily {
    pub a0: f64,
    pub p: f64,
    pub q: f64,
    pub b0: f64,
    pub gamma: f64,
}

impl BulkFamily {
    pub fn eval(&self, x: f64) -> (f64, f64) {
        (self.a0 - self.p * x.powf(self.q), self.b0 * (1.0 - x.powf(self.gamma)).max(0.0).sqrt())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkFit {
    pub profile: BulkProfile,
    /// L2 distance between the implied and target densities.
    pub residual: f64,
    /// Best parametric fit (stage one).
    pub family: BulkFamily,
    pub family_residual: f64,
    pub history: Vec<f64>,
}

const FIT_CELLS: usize = 256;
const KNOTS: usize = 32;

fn l2_on(grid: &[f64], rho: &[f64], target: &[f64]) -> f64 {
    let d2: Vec<f64> = rho.iter().zip(target).map(|(x, y)| (x - y) * (x - y)).collect();
    trapezoid(grid, &d2).sqrt()
}

/// Least-squares inversion of the bulk integral equation.
///
/// Stage one fits the five-parameter family [`BulkFamily`] by multi-start
/// Nelder–Mead, seeded from the support of the target. Stage two refines
/// piecewise-linear profiles on 32 knots by coordinate descent, with `b`
/// parametrized through non-negative decrements (hence monotone) and a weak
/// pull towards the stage-one profile. The refined profile is kept only if
/// it lowers the residual.
pub fn bulk_from_density(target: &DensityProfile, x_grid: &[f64]) -> Result<BulkFit> {
    if x_grid.is_empty()
        || x_grid.windows(2).any(|w| !(w[1] > w[0]))
        || x_grid[0] < 0.0
        || x_grid[x_grid.len() - 1] > 1.0
    {
        return Err(Error::InvalidInput("x grid must ascend within [0, 1]".into()));
    }
    let grid = &target.grid;
    let rho_max = target.rho.iter().copied().fold(0.0, f64::max);
    if rho_max <= 0.0 {
        return Err(Error::InvalidInput("target density vanishes".into()));
    }
    let support: Vec<f64> =
        grid.iter().zip(&target.rho).filter(|(_, &r)| r > 1e-3 * rho_max).map(|(&s, _)| s).collect();
    let (lo, hi) = (support[0], support[support.len() - 1]);
    let width = (hi - lo).max(1e-6);

    let family_of = |t: &[f64]| BulkFamily { a0: t[0], p: t[1], q: t[2].exp(), b0: t[3].exp(), gamma: t[4].exp() };
    let objective = |t: &[f64]| {
        let fam = family_of(t);
        let rho = forward_density(|x| fam.eval(x), grid, FIT_CELLS);
        l2_on(grid, &rho, &target.rho)
    };

    let mut best: Option<crate::optimize::NelderMeadResult> = None;
    let mut history = Vec::new();
    let mut any_converged = false;
    for p in [0.05 * width, 0.15 * width] {
        for gamma in [1.0f64, 1.5] {
            let x0 = [0.5 * (lo + hi), p, 0.0, (0.25 * width).ln(), gamma.ln()];
            let steps = [0.05 * width, 0.05 * width, 0.2, 0.1, 0.2];
            let r = nelder_mead(
                objective,
                &x0,
                &steps,
                NelderMeadOptions { max_iterations: 1500, f_tol: 1e-9, x_tol: 1e-6 },
            );
            any_converged |= r.converged;
            history.extend_from_slice(&r.history);
            if best.as_ref().is_none_or(|b| r.value < b.value) {
                best = Some(r);
            }
        }
    }
    let best = best.expect("at least one start");
    if !any_converged {
        return Err(Error::FitFailure { iterations: history.len(), residual: best.value, history });
    }
    let family = family_of(&best.x);
    let family_residual = best.value;

    // Stage two: monotone piecewise-linear refinement.
    let knots: Vec<f64> = (0..KNOTS).map(|k| k as f64 / (KNOTS - 1) as f64).collect();
    let base: Vec<(f64, f64)> = knots.iter().map(|&x| family.eval(x)).collect();
    let mut theta = Vec::with_capacity(2 * KNOTS);
    theta.extend(base.iter().map(|p| p.0));
    theta.push(base[0].1.sqrt());
    for k in 1..KNOTS {
        theta.push((base[k - 1].1 - base[k].1).max(0.0).sqrt());
    }
    let to_profile = |t: &[f64]| -> BulkProfile {
        let a = t[..KNOTS].to_vec();
        let mut b = Vec::with_capacity(KNOTS);
        let mut level = t[KNOTS] * t[KNOTS];
        b.push(level);
        for k in 1..KNOTS {
            level = (level - t[KNOTS + k] * t[KNOTS + k]).max(0.0);
            b.push(level);
        }
        BulkProfile { x: knots.clone(), a, b }
    };
    let penalty = 1e-4;
    let refined_objective = |t: &[f64]| {
        let prof = to_profile(t);
        let rho = forward_density(|x| prof.eval(x), grid, FIT_CELLS);
        let l2 = l2_on(grid, &rho, &target.rho);
        let pull: f64 = prof
            .a
            .iter()
            .zip(&prof.b)
            .zip(&base)
            .map(|((a, b), (a0, b0))| (a - a0).powi(2) + (b - b0).powi(2))
            .sum::<f64>()
            / KNOTS as f64;
        (l2 * l2 + penalty * pull, l2)
    };
    let mut current = refined_objective(&theta);
    let mut steps = vec![0.02 * width; 2 * KNOTS];
    for _sweep in 0..12 {
        for c in 0..theta.len() {
            let mut improved = false;
            for dir in [1.0, -1.0] {
                let old = theta[c];
                theta[c] = old + dir * steps[c];
                let trial = refined_objective(&theta);
                if trial.0 < current.0 {
                    current = trial;
                    improved = true;
                    break;
                }
                theta[c] = old;
            }
            if improved {
                steps[c] *= 1.5;
            } else {
                steps[c] *= 0.5;
            }
        }
        history.push(current.1);
    }
    let (knot_profile, residual) = if current.1 < family_residual {
        (to_profile(&theta), current.1)
    } else {
        (
            BulkProfile {
                x: knots.clone(),
                a: base.iter().map(|p| p.0).collect(),
                b: base.iter().map(|p| p.1).collect(),
            },
            family_residual,
        )
    };
    let on_grid = BulkProfile::from_fn(x_grid.to_vec(), |x| knot_profile.eval(x))?;
    Ok(BulkFit { profile: on_grid, residual, family, family_residual, history })
}

/// Parameters of `a(x) ≃ 1 − p x^q` and `b(x) ≃ ½√(1 − x^γ)` fitted to mean
/// coefficients over `x = n/d ∈ [0.05, 0.9]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BulkParams {
    pub p: f64,
    pub q: f64,
    pub gamma: f64,
    pub rms_a: f64,
    pub rms_b: f64,
    /// Residual above [`POOR_FIT_RMS`]: the data are not of this form.
    pub poor_fit: bool,
}

pub const POOR_FIT_RMS: f64 = 0.02;
pub const FIT_WINDOW: (f64, f64) = (0.05, 0.9);

pub fn fit_bulk(avg: &LanczosCoefficients, d: usize) -> Result<BulkParams> {
    fit_bulk_sequences(avg.a(), avg.b(), d)
}

/// As [`fit_bulk`], from raw mean sequences (`b[n − 1] = b_n`).
pub fn fit_bulk_sequences(a: &[f64], b: &[f64], d: usize) -> Result<BulkParams> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be positive".into()));
    }
    let inside = |x: f64| x >= FIT_WINDOW.0 && x <= FIT_WINDOW.1;
    let pa: Vec<(f64, f64)> =
        a.iter().enumerate().map(|(n, &v)| (n as f64 / d as f64, v)).filter(|(x, _)| inside(*x)).collect();
    let pb: Vec<(f64, f64)> =
        b.iter().enumerate().map(|(n, &v)| ((n + 1) as f64 / d as f64, v)).filter(|(x, _)| inside(*x)).collect();
    if pa.len() < 3 || pb.len() < 3 {
        return Err(Error::InsufficientData("fewer than 3 coefficients inside the fit window".into()));
    }
    let p_for = |q: f64| {
        let num: f64 = pa.iter().map(|(x, v)| x.powf(q) * (1.0 - v)).sum();
        let den: f64 = pa.iter().map(|(x, _)| x.powf(2.0 * q)).sum();
        num / den
    };
    let sse_a = |q: f64| {
        let p = p_for(q);
        pa.iter().map(|(x, v)| (1.0 - p * x.powf(q) - v).powi(2)).sum::<f64>()
    };
    let (q, ea) = grid_then_golden_min(sse_a, 0.05, 5.0, 200, 1e-13);
    let sse_b = |g: f64| pb.iter().map(|(x, v)| (0.5 * (1.0 - x.powf(g)).max(0.0).sqrt() - v).powi(2)).sum::<f64>();
    let (gamma, eb) = grid_then_golden_min(sse_b, 0.05, 10.0, 200, 1e-13);
    let rms_a = (ea / pa.len() as f64).sqrt();
    let rms_b = (eb / pb.len() as f64).sqrt();
    Ok(BulkParams { p: p_for(q), q, gamma, rms_a, rms_b, poor_fit: rms_a > POOR_FIT_RMS || rms_b > POOR_FIT_RMS })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaddedCoefficients {
    pub a: Vec<f64>,
    /// `b_1..b_{d−1}`.
    pub b: Vec<f64>,
    /// Relative jump between edge and bulk values at the splice.
    pub splice_mismatch: f64,
    pub splice_warning: bool,
}

pub const SPLICE_WARNING: f64 = 0.1;
const FADE: usize = 4;

/// Splices `values_edge` (indices `offset..`) onto `bulk` with a linear
/// cross-fade over four indices centred at `n_edge`.
fn splice(edge: &[f64], bulk: impl Fn(usize) -> f64, offset: usize, len: usize, n_edge: usize) -> Vec<f64> {
    // Index `n` of the output refers to coefficient `n + offset`.
    let edge_end = edge.len() + offset;
    let mut start = n_edge.saturating_sub(FADE / 2);
    start = start.min(edge_end.saturating_sub(FADE)).max(offset);
    (offset..offset + len)
        .map(|n| {
            let bv = bulk(n);
            if n_edge == 0 || n >= edge_end {
                return bv;
            }
            let ev = edge[n - offset];
            if n < start {
                ev
            } else if n >= start + FADE {
                bv
            } else {
                let w = ((n - start) as f64 + 0.5) / FADE as f64;
                ev + w * (bv - ev)
            }
        })
        .collect()
}

/// Full-length coefficients: moment-method edge for `n < n_edge`, bulk
/// profile at `x = n/d` beyond.
pub fn pad_coefficients(
    edge: &LanczosCoefficients,
    bulk: &BulkProfile,
    d: usize,
    n_edge: usize,
) -> Result<PaddedCoefficients> {
    if d == 0 {
        return Err(Error::InvalidDimension("d must be positive".into()));
    }
    if n_edge > edge.krylov_dim() || n_edge > d {
        return Err(Error::InvalidInput(format!(
            "n_edge = {n_edge} exceeds the edge chain ({}) or d ({d})",
            edge.krylov_dim()
        )));
    }
    let x = |n: usize| n as f64 / d as f64;
    let a = splice(edge.a(), |n| bulk.eval(x(n)).0, 0, d, n_edge);
    let b = splice(edge.b(), |n| bulk.eval(x(n)).1, 1, d - 1, n_edge);
    let rel = |e: f64, b: f64| (e - b).abs() / b.abs().max(1e-300);
    let splice_mismatch = if n_edge == 0 {
        0.0
    } else {
        let n = n_edge - 1;
        let mut m = rel(edge.a()[n], bulk.eval(x(n)).0);
        if n >= 1 {
            m = m.max(rel(edge.b()[n - 1], bulk.eval(x(n)).1));
        }
        m
    };
    Ok(PaddedCoefficients { a, b, splice_mismatch, splice_warning: splice_mismatch > SPLICE_WARNING })
}

/// Fixed-range histogram with mergeable counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    /// All samples seen, including those outside the range.
    pub total: u64,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Result<Self> {
        if !(hi > lo) || bins == 0 {
            return Err(Error::InvalidParameter("histogram needs hi > lo and at least one bin".into()));
        }
        Ok(Self { lo, hi, counts: vec![0; bins], total: 0 })
    }

    /// Freedman–Diaconis bin count for `data` on `[lo, hi]`.
    pub fn freedman_diaconis(data: &[f64], lo: f64, hi: f64) -> Result<Self> {
        if data.len() < 2 {
            return Err(Error::InsufficientData("need at least two samples".into()));
        }
        let mut s = data.to_vec();
        s.sort_by(f64::total_cmp);
        let iqr = quantile(&s, 0.75) - quantile(&s, 0.25);
        let h = 2.0 * iqr / (s.len() as f64).cbrt();
        let bins = if h > 0.0 { ((hi - lo) / h).ceil().clamp(1.0, 10_000.0) as usize } else { 1 };
        Self::new(lo, hi, bins)
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    pub fn add(&mut self, data: &[f64]) {
        let n = self.counts.len();
        let w = self.width();
        for &v in data {
            self.total += 1;
            if v >= self.lo && v <= self.hi {
                let i = (((v - self.lo) / w) as usize).min(n - 1);
                self.counts[i] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.lo != other.lo || self.hi != other.hi || self.counts.len() != other.counts.len() {
            return Err(Error::InvalidInput("histograms must share binning".into()));
        }
        for (c, o) in self.counts.iter_mut().zip(&other.counts) {
            *c += o;
        }
        self.total += other.total;
        Ok(())
    }

    pub fn centers(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.counts.len()).map(|i| self.lo + (i as f64 + 0.5) * w).collect()
    }

    /// Density at bin centres, normalized by all samples seen.
    pub fn density(&self) -> Result<DensityProfile> {
        let w = self.width();
        let t = self.total.max(1) as f64;
        let rho = self.counts.iter().map(|&c| c as f64 / (t * w)).collect();
        if self.counts.len() < 2 {
            return Err(Error::InsufficientData("density needs at least two bins".into()));
        }
        DensityProfile::new(self.centers(), rho)
    }
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let i = pos.floor() as usize;
    let f = pos - i as f64;
    if i + 1 < sorted.len() {
        sorted[i] + f * (sorted[i + 1] - sorted[i])
    } else {
        sorted[i]
    }
}
