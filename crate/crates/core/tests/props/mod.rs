//! Randomized invariants, shared by the `properties` suite and the
//! acceptance run. Every check uses a deterministic proptest RNG.

#![allow(dead_code)]

use krylov_svd::c64;
use krylov_svd::decomp::{lanczos_spectral, tridiagonalize_svd, LanczosCoefficients, SingularSpectrum};
use krylov_svd::ensembles::{EnsembleKind, EnsembleSpec};
use krylov_svd::hermitization::{hermitize, restricted_equivalence_check};
use krylov_svd::krylov::{complexity_curve, evolve, Normalization};
use krylov_svd::special::kummer_1f1;
use krylov_svd::spectral::{
    catalan_half, density_from_bulk, jacobi_moments, jacobi_moments_extended, moments_to_lanczos,
    moments_to_lanczos_extended, semicircle, spacing_ratios, wigner_dyson, BulkProfile,
};
use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

fn chain(max_len: usize) -> impl Strategy<Value = LanczosCoefficients> {
    (1..=max_len)
        .prop_flat_map(|k| (vec(-2.0..2.0f64, k), vec(0.05..2.0f64, k - 1)))
        .prop_map(|(a, b)| LanczosCoefficients::new(a, b).unwrap())
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

pub fn norm_conservation() -> Result<(), String> {
    run(64, (chain(100), vec(0.0..100.0f64, 1..6)), |(l, mut times)| {
        times.sort_by(f64::total_cmp);
        times.insert(0, 0.0);
        for w in evolve(&l, &times).unwrap() {
            ensure((w.norm_sqr() - 1.0).abs() < 1e-10, format!("norm drift {}", w.norm_sqr() - 1.0))?;
        }
        Ok(())
    })
}

pub fn diagonal_shift_invariance() -> Result<(), String> {
    run(64, (chain(40), -5.0..5.0f64), |(l, c)| {
        let times: Vec<f64> = (0..20).map(|i| 0.7 * i as f64).collect();
        let base = complexity_curve(&l, &times, Normalization::Raw).unwrap();
        let shifted = complexity_curve(&l.shifted(c), &times, Normalization::Raw).unwrap();
        for (x, y) in base.ks.iter().zip(&shifted.ks) {
            ensure((x - y).abs() < 1e-10, format!("shift changed K_S by {}", x - y))?;
        }
        Ok(())
    })
}

pub fn complexity_bounds() -> Result<(), String> {
    run(64, chain(40), |l| {
        let k = l.krylov_dim() as f64;
        let times: Vec<f64> = (0..30).map(|i| 0.5 * i as f64).collect();
        let c = complexity_curve(&l, &times, Normalization::Raw).unwrap();
        ensure(c.ks[0].abs() < 1e-12, "K_S(0) must vanish")?;
        for v in c.ks {
            ensure(v >= -1e-12 && v <= k - 1.0 + 1e-9, format!("K_S = {v} outside [0, {}]", k - 1.0))?;
        }
        Ok(())
    })
}

pub fn spacing_ratio_scale_invariance() -> Result<(), String> {
    run(64, (vec(0.01..1.0f64, 4..60), -3.0..3.0f64), |(gaps, log_c)| {
        let mut s = Vec::with_capacity(gaps.len());
        let mut acc = 0.0;
        for g in gaps {
            acc += g;
            s.push(acc);
        }
        let c = 10f64.powf(log_c);
        let r1 = spacing_ratios(&SingularSpectrum::new(s.clone()).unwrap()).unwrap();
        let r2 = spacing_ratios(&SingularSpectrum::new(s.iter().map(|x| x * c).collect()).unwrap()).unwrap();
        ensure(r1.ratios.len() == r2.ratios.len(), "ratio count changed")?;
        for (x, y) in r1.ratios.iter().zip(&r2.ratios) {
            ensure((x - y).abs() < 1e-12, format!("ratio drift {}", x - y))?;
        }
        Ok(())
    })
}

fn valid_chain(max_len: usize) -> impl Strategy<Value = LanczosCoefficients> {
    (1usize..=max_len)
        .prop_flat_map(|k| (vec(-1.0..1.0f64, k), vec(0.3..1.5f64, k - 1)))
        .prop_map(|(a, b)| LanczosCoefficients::new(a, b).unwrap())
}

fn check_round_trip(
    l: &LanczosCoefficients,
    back: krylov_svd::Result<LanczosCoefficients>,
) -> Result<(), TestCaseError> {
    let k = l.krylov_dim();
    let back = back.map_err(|e| TestCaseError::fail(e.to_string()))?;
    ensure(back.krylov_dim() == k, format!("chain length {} != {k}", back.krylov_dim()))?;
    for (x, y) in back.a().iter().zip(l.a()).chain(back.b().iter().zip(l.b())) {
        ensure((x - y).abs() < 1e-8, format!("coefficient drift {}", x - y))?;
    }
    Ok(())
}

/// Double-double moments: chains up to length 12.
pub fn moment_round_trip() -> Result<(), String> {
    run(64, valid_chain(12), |l| {
        let k = l.krylov_dim();
        check_round_trip(&l, moments_to_lanczos_extended(&jacobi_moments_extended(&l, 2 * k)))
    })
}

/// Moments rounded to double precision: chains up to length 8.
pub fn moment_round_trip_double() -> Result<(), String> {
    run(64, valid_chain(8), |l| {
        let k = l.krylov_dim();
        check_round_trip(&l, moments_to_lanczos(&jacobi_moments(&l, 2 * k)))
    })
}

fn integer_catalan(n: u64) -> u64 {
    // C_n = binom(2n, n) / (n + 1), built multiplicatively in integers.
    let mut c: u64 = 1;
    for i in 0..n {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

pub fn catalan_even_exact() -> Result<(), String> {
    for j in 0..=10u64 {
        let got = catalan_half(2 * j as usize);
        if got != integer_catalan(j) as f64 {
            return Err(format!("C_{j}: {got} != {}", integer_catalan(j)));
        }
    }
    Ok(())
}

pub fn level_repulsion_ordering() -> Result<(), String> {
    let at = |b: f64| wigner_dyson(0.1, b).unwrap();
    if at(4.0) < at(2.0) && at(2.0) < at(1.0) {
        Ok(())
    } else {
        Err(format!("ρ(0.1): β=1 {}, β=2 {}, β=4 {}", at(1.0), at(2.0), at(4.0)))
    }
}

pub fn kummer_contiguous_relation() -> Result<(), String> {
    // (b − a) M(a − 1) + (2a − b + z) M(a) − a M(a + 1) = 0 at fixed b, z.
    let strategy = (1.05..3.0f64, 0.25..3.0f64, prop_oneof![-50.0..0.0f64, -1e4..-700.0f64]);
    run(96, strategy, |(a, b, z)| {
        let m = |x: f64| kummer_1f1(x, b, z).unwrap();
        let (lo, mid, hi) = (m(a - 1.0), m(a), m(a + 1.0));
        let terms = [(b - a) * lo, (2.0 * a - b + z) * mid, -a * hi];
        let scale: f64 = terms.iter().map(|t| t.abs()).sum();
        let residual: f64 = terms.iter().sum();
        ensure(residual.abs() <= 1e-10 * scale.max(1e-300), format!("residual {residual:e} at scale {scale:e}"))
    })
}

pub fn kummer_exponential_identity() -> Result<(), String> {
    run(64, (0.1..8.0f64, 1u32..56, -600.0..0.0f64), |(a, eighths, z)| {
        let got = kummer_1f1(a, a, z).unwrap();
        ensure((got - z.exp()).abs() <= 1e-14 * z.exp().max(1e-300), "M(a; a; z) != e^z")?;
        // Terminating case b − a = −1 (b on a dyadic grid so b + 1 is exact):
        // M(b + 1; b; z) = e^z (1 + z/b).
        let b = eighths as f64 / 8.0;
        let t = kummer_1f1(b + 1.0, b, z).unwrap();
        let expect = z.exp() * (1.0 + z / b);
        ensure((t - expect).abs() <= 1e-12 * expect.abs().max(1e-300) + 1e-300, format!("{t} vs {expect}"))
    })
}

pub fn forward_map_semicircle() -> Result<(), String> {
    run(24, (-1.0..1.0f64, 0.5..2.0f64), |(c, s)| {
        let x: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
        let profile = BulkProfile::from_fn(x, |t| (c, s * (1.0 - t).sqrt())).unwrap();
        let lo = c - 2.2 * s;
        let h = 4.4 * s / 400.0;
        let grid: Vec<f64> = (0..400).map(|i| lo + (i as f64 + 0.5) * h).collect();
        let rho = density_from_bulk(&profile, &grid).unwrap();
        let l2 = rho.l2_against(|e| semicircle((e - c) / s) / s) * s.sqrt();
        ensure(l2 < 0.015, format!("semicircle L2 (unit scale) = {l2}"))?;
        ensure((rho.mass() - 1.0).abs() < 1e-3, format!("mass {}", rho.mass()))
    })
}

pub fn forward_map_normalization() -> Result<(), String> {
    let strategy = (-1.0..1.0f64, 0.0..1.0f64, 0.5..2.0f64, 0.2..1.0f64, 0.5..2.0f64);
    run(24, strategy, |(a0, p, q, b0, g)| {
        let x: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
        let profile =
            BulkProfile::from_fn(x, |t| (a0 - p * t.powf(q), b0 * (1.0 - t.powf(g)).max(0.0).sqrt())).unwrap();
        let lo = a0 - p - 2.0 * b0 - 0.1;
        let hi = a0 + 2.0 * b0 + 0.1;
        let grid: Vec<f64> = (0..600).map(|i| lo + (hi - lo) * (i as f64 + 0.5) / 600.0).collect();
        let rho = density_from_bulk(&profile, &grid).unwrap();
        ensure((rho.mass() - 1.0).abs() < 1e-3, format!("mass {}", rho.mass()))
    })
}

pub fn decomposition_invariants() -> Result<(), String> {
    let strategy = (2usize..24, any::<u64>(), vec((-1.0..1.0f64, -1.0..1.0f64), 24));
    run(32, strategy, |(d, seed, raw)| {
        let h = EnsembleSpec::new(EnsembleKind::GinUE, d, seed, 1).unwrap().sample(0).unwrap();
        let v: Vec<c64> = raw[..d].iter().map(|&(x, y)| c64::new(x, y)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-3 {
            return Ok(());
        }
        let v: Vec<c64> = v.into_iter().map(|z| z / n).collect();
        let f = tridiagonalize_svd(&h, Some(&v)).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(f.diagnostics.relative_residual < 1e-10, "reconstruction")?;
        ensure(f.diagnostics.s_unitarity < 1e-10 && f.diagnostics.t_unitarity < 1e-10, "unitarity")?;
        for (i, vi) in v.iter().enumerate() {
            ensure((f.t.get(i, 0) - vi).norm() < 1e-12, "first column of T is not the seed")?;
        }
        ensure(f.offdiag.iter().all(|&b| b >= 0.0), "negative off-diagonal")?;
        let eig = f.sigma_h_eigenvalues().unwrap();
        for (x, y) in eig.iter().zip(f.singular_values.values()) {
            ensure((x - y).abs() < 1e-9 * f.singular_values.max(), "singular values not preserved")?;
        }
        Ok(())
    })
}

pub fn spectral_and_dense_chains_agree() -> Result<(), String> {
    run(24, (vec(0.0..3.0f64, 2..30), any::<u64>()), |(mut nodes, seed)| {
        nodes.sort_by(f64::total_cmp);
        nodes.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
        let d = nodes.len();
        let w: Vec<f64> = (0..d).map(|i| 1.0 + ((seed >> (i % 60)) & 3) as f64).collect();
        let total: f64 = w.iter().sum();
        let fast = lanczos_spectral(&nodes, &w).unwrap();
        let a = krylov_svd::CMatrix::from_diagonal(&nodes.iter().map(|&x| c64::new(x, 0.0)).collect::<Vec<_>>());
        let v0: Vec<c64> = w.iter().map(|x| c64::new((x / total).sqrt(), 0.0)).collect();
        let dense = krylov_svd::decomp::lanczos(&a, &v0, d, true).unwrap();
        ensure(fast.krylov_dim() == dense.krylov_dim(), "chain lengths differ")?;
        for (x, y) in fast.a().iter().zip(dense.a()).chain(fast.b().iter().zip(dense.b())) {
            ensure((x - y).abs() < 1e-9, format!("{x} vs {y}"))?;
        }
        Ok(())
    })
}

pub fn hermitization_equivalence() -> Result<(), String> {
    let strategy = (1usize..=64, any::<u64>(), vec((-1.0..1.0f64, -1.0..1.0f64), 64));
    run(50, strategy, |(d, seed, raw)| {
        let h = EnsembleSpec::new(EnsembleKind::GinUE, d, seed, 1).unwrap().sample(0).unwrap();
        let pair = hermitize(&h).unwrap();
        for i in 0..d {
            for j in 0..d {
                ensure(pair.doubled.get(i, j) == c64::new(0.0, 0.0), "nonzero diagonal block")?;
                ensure(pair.doubled.get(d + i, d + j) == c64::new(0.0, 0.0), "nonzero diagonal block")?;
            }
        }
        let w: Vec<c64> = raw[..d].iter().map(|&(x, y)| c64::new(x, y)).collect();
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-3 {
            return Ok(());
        }
        let w: Vec<c64> = w.into_iter().map(|z| z / n).collect();
        let r = restricted_equivalence_check(&h, &w).map_err(|e| TestCaseError::fail(e.to_string()))?;
        ensure(r.max_deviation < 1e-9, format!("deviation {}", r.max_deviation))
    })
}

/// Every suite, by name.
pub type Suite = fn() -> Result<(), String>;

pub fn all() -> Vec<(&'static str, Suite)> {
    vec![
        ("norm conservation", norm_conservation),
        ("diagonal-shift invariance", diagonal_shift_invariance),
        ("complexity bounds", complexity_bounds),
        ("spacing-ratio scale invariance", spacing_ratio_scale_invariance),
        ("moment round trip (double-double)", moment_round_trip),
        ("moment round trip (double)", moment_round_trip_double),
        ("even catalan numbers exact", catalan_even_exact),
        ("level-repulsion ordering", level_repulsion_ordering),
        ("kummer contiguous relation", kummer_contiguous_relation),
        ("kummer exponential identities", kummer_exponential_identity),
        ("forward map semicircle", forward_map_semicircle),
        ("forward map normalization", forward_map_normalization),
        ("decomposition invariants", decomposition_invariants),
        ("spectral vs dense chains", spectral_and_dense_chains_agree),
        ("hermitization equivalence", hermitization_equivalence),
    ]
}
