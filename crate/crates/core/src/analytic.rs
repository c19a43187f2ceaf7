//! Closed-form complexity of 2×2 ensembles and its continuous-β peak structure.
//!
//! For a two-level chain with singular values `σ ± λ/2` seeded in the uniform
//! superposition, `K_S(t) = sin²(λt/2)`. Averaging over the Wigner–Dyson
//! surmise gives
//!
//! ```text
//! K_S(t) = ½ (1 − M((1 + β)/2; ½; −t²/(4 z_β²))),   z_β = Γ(1 + β/2)/Γ((1 + β)/2).
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::golden_section_max;
use crate::special::{kummer_1f1, wigner_dyson_scale};

/// Upper end of the peak search window.
pub const SCAN_T_MAX: f64 = 50.0;
const SCAN_POINTS: usize = 1000;
/// Plateau of `K_S/d` at `d = 2`.
pub const PLATEAU_2X2: f64 = 0.25;

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn averaged_sin2(t: f64, exponent: f64) -> Result<f64> {
    let z = wigner_dyson_scale(exponent);
    let x = t * t / (4.0 * z * z);
    Ok(0.5 * (1.0 - kummer_1f1(0.5 * (1.0 + exponent), 0.5, -x)?))
}

/// Ensemble-averaged `K_S(t)` of 2×2 matrices with Dyson index `beta > 0`.
pub fn ks_2x2(t: f64, beta: f64) -> Result<f64> {
    check_time(t)?;
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Dyson index must be positive (got {beta}); use ks_poisson for the uncorrelated case"
        )));
    }
    averaged_sin2(t, beta)
}

/// Uncorrelated (Poisson) spacings: `½(1 − e^{−πt²/4})`.
pub fn ks_poisson(t: f64) -> f64 {
    0.5 * (1.0 - (-std::f64::consts::PI * t * t / 4.0).exp())
}

/// `K_S` for any `beta ≥ 0`, dispatching `beta = 0` to [`ks_poisson`].
pub fn ks_2x2_or_poisson(t: f64, beta: f64) -> Result<f64> {
    if beta == 0.0 {
        check_time(t)?;
        Ok(ks_poisson(t))
    } else {
        ks_2x2(t, beta)
    }
}

/// Hermitized complexity at `d = 1` for singular values distributed as
/// `σ^α e^{−(2 z_α σ)²}`.
pub fn kh_d1(t: f64, alpha: f64) -> Result<f64> {
    check_time(t)?;
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(Error::InvalidParameter(format!("hard-edge exponent must be >= 0, got {alpha}")));
    }
    averaged_sin2(t, alpha)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeakScanResult {
    pub beta: f64,
    /// Time of the global maximum on `(0, 50]`.
    pub t_max: f64,
    /// Maximum of `K_S/d` with `d = 2`.
    pub k_max: f64,
    /// Whether an interior maximum exceeds the plateau `0.25`.
    pub has_peak: bool,
}

/// Locates the global maximum of `K_S/2` on `(0, 50]`: coarse grid, then
/// golden-section refinement around the best grid point.
pub fn peak_scan(beta: f64) -> Result<PeakScanResult> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("Dyson index must be finite and >= 0, got {beta}")));
    }
    let k = |t: f64| ks_2x2_or_poisson(t, beta).map(|v| 0.5 * v);
    let dt = SCAN_T_MAX / SCAN_POINTS as f64;
    let mut best = (SCAN_POINTS, f64::NEG_INFINITY);
    for i in 1..=SCAN_POINTS {
        let v = k(i as f64 * dt)?;
        if v > best.1 {
            best = (i, v);
        }
    }
    let (i, v) = best;
    if i == SCAN_POINTS {
        return Ok(PeakScanResult { beta, t_max: SCAN_T_MAX, k_max: v, has_peak: false });
    }
    let lo = (i - 1) as f64 * dt;
    let hi = (i + 1) as f64 * dt;
    let mut err = None;
    let (t_max, k_max) = golden_section_max(
        |t| match k(t) {
            Ok(v) => v,
            Err(e) => {
                err = Some(e);
                f64::NAN
            }
        },
        lo,
        hi,
        1e-12,
    );
    if let Some(e) = err {
        return Err(e);
    }
    Ok(PeakScanResult { beta, t_max, k_max, has_peak: k_max > PLATEAU_2X2 + 1e-12 })
}

/// Onset of the peak regime: the Dyson index at which the peak time `t_max(β)`
/// turns from decreasing to increasing. Found by bisection on the sign of the
/// centred difference `t_max(β + h) − t_max(β − h)`, `h = 0.01`, to `1e−3`.
pub fn find_beta_min() -> Result<f64> {
    const H: f64 = 0.01;
    let slope = |b: f64| -> Result<f64> { Ok(peak_scan(b + H)?.t_max - peak_scan(b - H)?.t_max) };
    let (mut lo, mut hi) = (0.1, 1.5);
    if !(slope(lo)? < 0.0 && slope(hi)? > 0.0) {
        return Err(Error::DecompositionFailure("peak time is not bracketed on [0.1, 1.5]".into()));
    }
    while hi - lo > 1e-3 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
