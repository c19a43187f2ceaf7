//! Checks against independent references: quadrature, brute-force matrix
//! exponentials, Monte Carlo and closed forms derived by hand.

use std::f64::consts::PI;

use faer::Mat;
use krylov_svd::analytic::{kh_d1, ks_2x2, ks_poisson};
use krylov_svd::decomp::{
    lanczos, lanczos_run, polar_sqrt, singular_values, svd, thermal_state, tridiagonalize_svd, LanczosCoefficients,
    SingularSpectrum,
};
use krylov_svd::ensemble::{e0_chain, thermal_chain};
use krylov_svd::ensembles::{sample_ginibre, EnsembleKind, EnsembleSpec, GinibreKind};
use krylov_svd::krylov::{complexity_curve, ehrenfest_rate, evolve, Normalization};
use krylov_svd::seed::realization_rng;
use krylov_svd::special::wigner_dyson_scale;
use krylov_svd::spectral::*;
use krylov_svd::{c64, CMatrix};
use quadrature::integrate;
use rand::Rng;
use rand_distr::{Distribution, Exp1};

/// `∫_lo^hi f` split into panels of width `panel` for oscillatory integrands.
fn integral(f: impl Fn(f64) -> f64, lo: f64, hi: f64, panel: f64) -> f64 {
    let n = ((hi - lo) / panel).ceil().max(1.0) as usize;
    let h = (hi - lo) / n as f64;
    (0..n).map(|i| integrate(&f, lo + i as f64 * h, lo + (i + 1) as f64 * h, 1e-14).integral).sum()
}

#[test]
fn quadrant_law_is_normalized_with_catalan_moments() {
    let mass = integrate(quadrant_law, 0.0, 2.0, 1e-14).integral;
    assert!((mass - 1.0).abs() < 1e-8);
    for k in 0..8 {
        let m = integrate(|s| s.powi(k as i32) * quadrant_law(s), 0.0, 2.0, 1e-14).integral;
        assert!((m - catalan_half(k)).abs() < 1e-8 * m, "k = {k}: {m} vs {}", catalan_half(k));
    }
}

#[test]
fn quadrant_cdf_matches_quadrature() {
    for s in [0.3, 1.0, 1.7] {
        let q = integrate(quadrant_law, 0.0, s, 1e-14).integral;
        assert!((q - quadrant_cdf(s)).abs() < 1e-12);
    }
}

#[test]
fn wigner_dyson_has_unit_mass_and_mean() {
    for beta in [1.0, 2.0, 4.0] {
        let mass = integral(|l| wigner_dyson(l, beta).unwrap(), 0.0, 12.0, 1.0);
        let mean = integral(|l| l * wigner_dyson(l, beta).unwrap(), 0.0, 12.0, 1.0);
        assert!((mass - 1.0).abs() < 1e-8 && (mean - 1.0).abs() < 1e-8, "β = {beta}: {mass}, {mean}");
    }
    assert!((wigner_dyson_scale(2.0) - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-14);
    assert!((wigner_dyson(1.0, 1.0).unwrap() - 0.7162).abs() < 1e-4);
}

#[test]
fn two_level_complexity_is_the_surmise_average_of_sin_squared() {
    // K_S(t) = ∫ sin²(λt/2) ρ_WD(λ) dλ, including times on the
    // large-argument branch of the hypergeometric evaluation.
    for beta in [0.5, 1.0, 2.0, 3.7, 4.0] {
        for t in [0.5, 2.0, 5.0, 12.0, 60.0, 100.0] {
            let direct = integral(|l| (0.5 * l * t).sin().powi(2) * wigner_dyson(l, beta).unwrap(), 0.0, 12.0, 0.05);
            let closed = ks_2x2(t, beta).unwrap();
            assert!((direct - closed).abs() < 1e-9, "β = {beta}, t = {t}: {direct} vs {closed}");
        }
    }
}

#[test]
fn uncorrelated_complexity_is_the_small_beta_surmise_average() {
    // ρ(λ) = (2/π) e^{−λ²/π} is the β → 0 limit of the surmise (unit mean).
    let rho = |l: f64| 2.0 / PI * (-(l * l) / PI).exp();
    assert!((integral(|l| l * rho(l), 0.0, 12.0, 1.0) - 1.0).abs() < 1e-10);
    for t in [0.3, 1.0, 3.0, 8.0] {
        let direct = integral(|l| (0.5 * l * t).sin().powi(2) * rho(l), 0.0, 12.0, 0.05);
        assert!((direct - ks_poisson(t)).abs() < 1e-9);
    }
}

#[test]
fn hermitized_d1_complexity_is_a_sin_squared_average() {
    for alpha in [0.0, 1.0, 3.0] {
        let z = wigner_dyson_scale(alpha);
        let w = |s: f64| s.powf(alpha) * (-(2.0 * z * s).powi(2)).exp();
        let norm = integral(w, 0.0, 6.0, 0.5);
        for t in [0.5, 2.0, 7.0] {
            let direct = integral(|s| (s * t).sin().powi(2) * w(s), 0.0, 6.0, 0.05) / norm;
            assert!((direct - kh_d1(t, alpha).unwrap()).abs() < 1e-9);
        }
    }
}

#[test]
fn poisson_spacing_ratio_from_iid_spacings() {
    let mut rng = realization_rng(99, 0);
    let spacings: Vec<f64> = (0..1_000_001).map(|_| Exp1.sample(&mut rng)).collect();
    let direct: f64 =
        spacings.windows(2).map(|w| w[0].min(w[1]) / w[0].max(w[1])).sum::<f64>() / (spacings.len() - 1) as f64;
    assert!((direct - (2.0 * 2f64.ln() - 1.0)).abs() < 0.005);
    let mut acc = 0.0;
    let levels: Vec<f64> = std::iter::once(0.0)
        .chain(spacings.iter().map(|s| {
            acc += s;
            acc
        }))
        .collect();
    let r = spacing_ratios(&SingularSpectrum::new(levels).unwrap()).unwrap();
    assert!((r.mean_r - 0.386).abs() < 0.005);
    // Near-coincident levels (relative to the ~1e6 span) are dropped, which
    // removes only ratios close to zero.
    assert!(r.n_dropped_degenerate > 0 && r.n_dropped_degenerate < 1000);
    assert!(r.mean_r >= direct && r.mean_r - direct < 1e-3, "{} vs {direct}", r.mean_r);
}

fn dense_expm_minus_i(j: &Mat<f64>, t: f64) -> Mat<c64> {
    // Scaling and squaring with a Taylor series.
    let n = j.nrows();
    let m = Mat::<c64>::from_fn(n, n, |r, c| c64::new(0.0, -t * j[(r, c)]));
    let norm: f64 = (0..n).map(|r| (0..n).map(|c| m[(r, c)].norm()).sum::<f64>()).fold(0.0, f64::max);
    let s = (norm / 0.25).log2().ceil().max(0.0) as i32;
    let scaled = Mat::<c64>::from_fn(n, n, |r, c| m[(r, c)] * 0.5f64.powi(s));
    let mut result = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for k in 1..30 {
        term = &term * &scaled;
        term = Mat::from_fn(n, n, |r, c| term[(r, c)] / k as f64);
        result = &result + &term;
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

#[test]
fn evolution_matches_dense_matrix_exponential() {
    let mut rng = realization_rng(5, 0);
    for k in 1..=8 {
        let a: Vec<f64> = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (1..k).map(|_| rng.random_range(0.1..1.5)).collect();
        let l = LanczosCoefficients::new(a, b).unwrap();
        let times = [0.0, 0.5, 3.0, 17.0];
        let wf = evolve(&l, &times).unwrap();
        for (w, &t) in wf.iter().zip(&times) {
            let u = dense_expm_minus_i(&l.jacobi_matrix(), t);
            for n in 0..k {
                assert!((w.amplitudes[n] - u[(n, 0)]).norm() < 1e-9, "K = {k}, t = {t}, n = {n}");
            }
        }
    }
}

#[test]
fn ehrenfest_rate_matches_finite_difference_and_early_growth() {
    let l = LanczosCoefficients::new(vec![0.3, -0.2, 0.5, 0.1], vec![0.8, 1.1, 0.6]).unwrap();
    let dt = 1e-3;
    let c = complexity_curve(&l, &[0.0, dt, 2.0 * dt], Normalization::Raw).unwrap();
    // K_S is even in t, so the centred second difference uses K(−dt) = K(dt).
    let second = 2.0 * (c.ks[1] - c.ks[0]) / (dt * dt);
    assert!((second - ehrenfest_rate(&l)).abs() < 1e-5);
    let b1 = l.b()[0];
    let t = 0.05 / b1;
    let k = complexity_curve(&l, &[t], Normalization::Raw).unwrap().ks[0];
    assert!((k / (b1 * b1 * t * t) - 1.0).abs() < 0.02);
    assert_eq!(ehrenfest_rate(&LanczosCoefficients::new(vec![1.0], vec![]).unwrap()), 0.0);
}

fn re(x: f64) -> c64 {
    c64::new(x, 0.0)
}

#[test]
fn two_by_two_hand_computed_chain() {
    // σ ∈ {0, 2} from an equal superposition: a = (σ0 + σ1)/2, b = |σ1 − σ0|/2.
    let h = CMatrix::from_real_row_major(2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let f = tridiagonalize_svd(&h, Some(&[re(s), re(s)])).unwrap();
    assert!((f.diag[0] - 1.0).abs() < 1e-14 && (f.diag[1] - 1.0).abs() < 1e-14);
    assert!((f.offdiag[0] - 1.0).abs() < 1e-14);
    let l =
        lanczos(&CMatrix::from_real_row_major(2, &[0.0, 0.0, 0.0, 2.0]).unwrap(), &[re(s), re(s)], 2, true).unwrap();
    assert_eq!(l.krylov_dim(), 2);
    assert!((l.a()[0] - 1.0).abs() < 1e-14 && (l.b()[0] - 1.0).abs() < 1e-14);
}

#[test]
fn hermitian_positive_definite_input_reduces_to_plain_lanczos() {
    let g = EnsembleSpec::new(EnsembleKind::GinUE, 20, 8, 1).unwrap().sample(0).unwrap();
    let h = g.adjoint().matmul(&g).add(&CMatrix::identity(20).scale(re(0.1)));
    let f = tridiagonalize_svd(&h, None).unwrap();
    let mut e0 = vec![re(0.0); 20];
    e0[0] = re(1.0);
    let l = lanczos(&h, &e0, 20, true).unwrap();
    for (x, y) in f.diag.iter().zip(l.a()) {
        assert!((x - y).abs() < 1e-10);
    }
    for (x, y) in f.offdiag.iter().zip(l.b()) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn reorthogonalized_lanczos_keeps_an_orthonormal_basis() {
    let d = 256;
    let g = EnsembleSpec::new(EnsembleKind::GinUE, d, 1, 1).unwrap().sample(0).unwrap();
    let a = g.add(&g.adjoint());
    let mut v0 = vec![re(0.0); d];
    v0[0] = re(1.0);
    let run = lanczos_run(&a, &v0, d, true).unwrap();
    let k = run.basis.len();
    let q = CMatrix::from_fn(d, |i, j| if j < k { run.basis[j][i] } else { re(0.0) });
    let gram = q.adjoint().matmul(&q);
    let defect = CMatrix::from_fn(d, |i, j| {
        let target = if i == j && i < k { 1.0 } else { 0.0 };
        gram.get(i, j) - re(target)
    });
    assert!(defect.frobenius_norm() < 1e-10);
    // Similarity: the Jacobi spectrum is the spectrum of A when K = d.
    assert_eq!(k, d);
    let mut eig_a = a.as_mat().self_adjoint_eigenvalues(faer::Side::Lower).unwrap();
    let eig_j = run.coefficients.eigenvalues().unwrap();
    eig_a.sort_by(f64::total_cmp);
    for (x, y) in eig_a.iter().zip(&eig_j) {
        assert!((x - y).abs() < 1e-8 * eig_a.iter().map(|v| v.abs()).fold(0.0, f64::max));
    }
}

#[test]
fn singular_values_of_hermitian_and_special_matrices() {
    let g = EnsembleSpec::new(EnsembleKind::GinUE, 12, 2, 1).unwrap().sample(0).unwrap();
    let h = g.add(&g.adjoint());
    let mut abs_eig: Vec<f64> =
        h.as_mat().self_adjoint_eigenvalues(faer::Side::Lower).unwrap().iter().map(|x| x.abs()).collect();
    abs_eig.sort_by(f64::total_cmp);
    for (x, y) in singular_values(&h).unwrap().values().iter().zip(&abs_eig) {
        assert!((x - y).abs() < 1e-10);
    }
    assert_eq!(singular_values(&CMatrix::identity(2)).unwrap().values(), &[1.0, 1.0]);
    let nil = CMatrix::from_real_row_major(2, &[0.0, 2.0, 0.0, 0.0]).unwrap();
    let s = singular_values(&nil).unwrap();
    assert!(s.values()[0].abs() < 1e-15 && (s.values()[1] - 2.0).abs() < 1e-15);
    // Square root of H†H.
    let p = polar_sqrt(&g).unwrap();
    let hh = g.adjoint().matmul(&g);
    assert!(p.matmul(&p).sub(&hh).frobenius_norm() < 1e-10 * hh.frobenius_norm());
    // Unitary input.
    let u = svd(&g).unwrap().u;
    assert!(polar_sqrt(&u).unwrap().sub(&CMatrix::identity(12)).frobenius_norm() < 1e-12);
}

#[test]
fn thermal_state_normalization_and_limits() {
    let h = EnsembleSpec::new(EnsembleKind::GinUE, 16, 4, 1).unwrap().sample(0).unwrap();
    for beta in [0.0, 1.0, 5.0] {
        let psi = thermal_state(&h, beta).unwrap();
        let n: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        assert!((n - 1.0).abs() < 1e-14);
    }
    let f = svd(&h).unwrap();
    let cold = thermal_state(&h, 500.0).unwrap();
    let overlap: c64 = (0..16).map(|i| f.v.get(i, 0).conj() * cold[i]).sum();
    assert!((overlap.norm() - 1.0).abs() < 1e-10);
    assert!(thermal_state(&h, -1.0).is_err());
    // β = 0 on d = 4 puts weight 1/4 (amplitude 1/2) on each v_i.
    let small = EnsembleSpec::new(EnsembleKind::GinUE, 4, 3, 1).unwrap().sample(0).unwrap();
    let g = svd(&small).unwrap();
    let psi = thermal_state(&small, 0.0).unwrap();
    for j in 0..4 {
        let c: c64 = (0..4).map(|i| g.v.get(i, j).conj() * psi[i]).sum();
        assert!((c.norm() - 0.5).abs() < 1e-12);
    }
}

#[test]
fn spectral_thermal_chain_matches_dense_lanczos() {
    let h = EnsembleSpec::new(EnsembleKind::GinUE, 24, 6, 1).unwrap().sample(0).unwrap();
    let spectrum = singular_values(&h).unwrap();
    for beta in [0.0, 2.0] {
        let dense = lanczos(&polar_sqrt(&h).unwrap(), &thermal_state(&h, beta).unwrap(), 24, true).unwrap();
        let fast = thermal_chain(&spectrum, beta).unwrap();
        assert_eq!(dense.krylov_dim(), fast.krylov_dim());
        for (x, y) in dense.a().iter().zip(fast.a()).chain(dense.b().iter().zip(fast.b())) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}

#[test]
fn ginibre_entry_statistics() {
    let d = 1024;
    let h = sample_ginibre(GinibreKind::GinOE, d, &mut realization_rng(12, 0)).unwrap();
    let n = (d * d) as f64;
    let entries = h.to_row_major();
    let mean: f64 = entries.iter().map(|z| z.re).sum::<f64>() / n;
    let var: f64 = entries.iter().map(|z| (z.re - mean).powi(2)).sum::<f64>() / n;
    assert!(mean.abs() < 4.0 * (1.0 / d as f64 / n).sqrt());
    assert!((var * d as f64 - 1.0).abs() < 0.05);
    let draws: Vec<f64> = (0..20_000)
        .map(|i| sample_ginibre(GinibreKind::GinUE, 1, &mut realization_rng(13, i)).unwrap().get(0, 0).norm_sqr())
        .collect();
    let m = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((m - 1.0).abs() < 0.03);
}

#[test]
fn bulk_fit_recovers_exact_parameters_and_flags_the_semicircle() {
    let d = 400;
    let a: Vec<f64> = (0..d).map(|n| 1.0 - 0.28 * (n as f64 / d as f64).powf(0.88)).collect();
    let b: Vec<f64> = (1..d).map(|n| 0.5 * (1.0 - (n as f64 / d as f64).powf(1.2)).sqrt()).collect();
    let fit = fit_bulk_sequences(&a, &b, d).unwrap();
    assert!((fit.p - 0.28).abs() < 1e-6 && (fit.q - 0.88).abs() < 1e-6 && (fit.gamma - 1.2).abs() < 1e-6);
    assert!(!fit.poor_fit);
    // Hermitian (semicircle) chains: a ≈ 0, b ≈ √(1 − x).
    let a0 = vec![0.0; d];
    let bs: Vec<f64> = (1..d).map(|n| (1.0 - n as f64 / d as f64).sqrt()).collect();
    assert!(fit_bulk_sequences(&a0, &bs, d).unwrap().poor_fit);
}

#[test]
fn forward_map_of_the_fitted_profile_reproduces_the_quadrant_law() {
    let x: Vec<f64> = (0..=200).map(|i| i as f64 / 200.0).collect();
    let eq3 = BulkProfile::from_fn(x, |t| (1.0 - 0.28 * t.powf(0.88), 0.5 * (1.0 - t.powf(1.2)).sqrt())).unwrap();
    let grid: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) * 0.01).collect();
    let rho = density_from_bulk(&eq3, &grid).unwrap();
    assert!(rho.l2_against(quadrant_law) < 0.03);
}

#[test]
fn inverse_map_recovers_known_profiles() {
    let x: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let sgrid: Vec<f64> = (0..400).map(|i| -2.0 + (i as f64 + 0.5) * 0.01).collect();
    let semi = DensityProfile::from_fn(sgrid, semicircle).unwrap();
    let fit = bulk_from_density(&semi, &x).unwrap();
    for (i, &xi) in x.iter().enumerate().filter(|(_, &xi)| xi <= 0.9) {
        assert!(fit.profile.a[i].abs() < 0.02);
        assert!((fit.profile.b[i] - (1.0 - xi).sqrt()).abs() < 0.02, "x = {xi}");
    }
    let back = density_from_bulk(&fit.profile, &semi.grid).unwrap();
    assert!(back.l2_distance(&semi).unwrap() < 0.03);

    let qgrid: Vec<f64> = (0..200).map(|i| (i as f64 + 0.5) * 0.01).collect();
    let quad = DensityProfile::from_fn(qgrid, quadrant_law).unwrap();
    let fit = bulk_from_density(&quad, &x).unwrap();
    for (i, &xi) in x.iter().enumerate().filter(|(_, &xi)| (0.05..=0.9).contains(&xi)) {
        let (a3, b3) = (1.0 - 0.28 * xi.powf(0.88), 0.5 * (1.0 - xi.powf(1.2)).sqrt());
        assert!((fit.profile.a[i] / a3 - 1.0).abs() < 0.05, "a at x = {xi}");
        assert!((fit.profile.b[i] / b3 - 1.0).abs() < 0.05, "b at x = {xi}");
    }
    let back = density_from_bulk(&fit.profile, &quad.grid).unwrap();
    assert!(back.l2_distance(&quad).unwrap() < 0.03);
}

#[test]
fn moment_edge_matches_numerical_chain_at_the_start() {
    let l = quadrant_edge_coefficients(12).unwrap();
    let m1 = 8.0 / (3.0 * PI);
    assert!((l.a()[0] - m1).abs() < 1e-15);
    assert!((l.b()[0].powi(2) - (1.0 - 64.0 / (9.0 * PI * PI))).abs() < 1e-15);
    // A single large GinOE draw already sits close to the moment-method edge.
    let h = EnsembleSpec::new(EnsembleKind::GinOE, 400, 3, 1).unwrap().sample(0).unwrap();
    let numeric = e0_chain(&h).unwrap();
    assert!((numeric.a()[0] / l.a()[0] - 1.0).abs() < 0.1);
}
