//! Kummer's confluent hypergeometric function on the negative real axis.
//!
//! `M(a; b; −x)` for `x ≥ 0` is evaluated as
//!
//! * `x ≤ 700`: Kummer's transformation `M(a; b; −x) = e^{−x} M(b − a; b; x)`,
//!   whose series has no catastrophic cancellation for large `x`; terms and
//!   partial sums are kept in double-double arithmetic.
//! * `x > 700`: the algebraic large-argument expansion
//!   `Γ(b)/Γ(b − a) · x^{−a} Σ_s (a)_s (a − b + 1)_s / s! · x^{−s}`, truncated at
//!   its smallest term; the exponentially small companion is below `e^{−700}`.
//!
//! When `b − a` is a non-positive integer the transformed series terminates and
//! is used for every `x`.

use crate::dd::Dd;
use statrs::function::gamma::{gamma, ln_gamma};

use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 700.0;
const MAX_ARGUMENT: f64 = 1e4;
const MAX_A: f64 = 64.0;
const MAX_B: f64 = 8.0;

/// `Γ(1 + β/2) / Γ((1 + β)/2)`, the scale of the Wigner–Dyson surmise.
pub fn wigner_dyson_scale(beta: f64) -> f64 {
    (ln_gamma(1.0 + 0.5 * beta) - ln_gamma(0.5 * (1.0 + beta))).exp()
}

/// `1/Γ(y)`, zero at the poles.
pub fn recip_gamma(y: f64) -> f64 {
    if y > 0.0 {
        return 1.0 / gamma(y);
    }
    if y == y.round() {
        return 0.0;
    }
    // Reflection: Γ(y) Γ(1 − y) = π / sin(πy).
    (std::f64::consts::PI * y).sin() * gamma(1.0 - y) / std::f64::consts::PI
}

fn non_positive_integer(y: f64) -> bool {
    y <= 0.0 && y == y.round()
}

/// `M(a; b; z)` for `z ≤ 0` on the validated domain `0 < a ≤ 64`,
/// `0 < b ≤ 8`, `|z| ≤ 10⁴`.
pub fn kummer_1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && z.is_finite()) {
        return Err(Error::Domain("arguments must be finite".into()));
    }
    if !(a > 0.0 && a <= MAX_A) {
        return Err(Error::Domain(format!("a = {a} outside (0, {MAX_A}]")));
    }
    if !(b > 0.0 && b <= MAX_B) {
        return Err(Error::Domain(format!("b = {b} outside (0, {MAX_B}]")));
    }
    if z > 0.0 || -z > MAX_ARGUMENT {
        return Err(Error::Domain(format!("z = {z} outside [-{MAX_ARGUMENT}, 0]")));
    }
    let x = -z;
    if x == 0.0 {
        return Ok(1.0);
    }
    if a == b {
        return Ok((-x).exp());
    }
    let terminating = non_positive_integer(b - a);
    if x <= SERIES_LIMIT || terminating {
        Ok(transformed_series(a, b, x))
    } else {
        Ok(large_argument(a, b, x))
    }
}

/// `e^{−x} Σ_n (b − a)_n / (b)_n · x^n / n!`.
fn transformed_series(a: f64, b: f64, x: f64) -> f64 {
    let c = b - a;
    let mut term = Dd::from(1.0);
    let mut sum = Dd::from(1.0);
    let mut n = 0.0f64;
    let max_terms = (x + 40.0 * x.sqrt() + 200.0) as usize;
    for _ in 0..max_terms {
        let num = c + n;
        if num == 0.0 {
            break;
        }
        term = term * Dd::from(num) / Dd::from(b + n) * Dd::from(x) / Dd::from(n + 1.0);
        sum += term;
        n += 1.0;
        // Past the peak the terms decay monotonically.
        if n > x && (term.hi().abs() <= 1e-34 * sum.hi().abs()) {
            break;
        }
    }
    sum.to_f64() * (-x).exp()
}

fn large_argument(a: f64, b: f64, x: f64) -> f64 {
    let prefactor = gamma(b) * recip_gamma(b - a) * (-a * x.ln()).exp();
    let c = a - b + 1.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    let mut s = 0.0f64;
    loop {
        let next = term * (a + s) * (c + s) / ((s + 1.0) * x);
        if next.abs() >= term.abs() || next.abs() <= 1e-17 * sum.abs() {
            if next.abs() < term.abs() {
                sum += next;
            }
            break;
        }
        sum += next;
        term = next;
        s += 1.0;
    }
    prefactor * sum
}
