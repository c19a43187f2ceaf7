//! Tridiagonalization of non-Hermitian matrices through their singular value
//! decomposition, `H = S Σ_h T†`, and the Krylov-chain dynamics generated by
//! the Jacobi matrix `Σ_h` of `√(H†H)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`matrix`] and [`seed`] — dense complex matrices and reproducible random streams;
//! * [`ensembles`] — Ginibre, Poisson-diagonal, interpolating, non-Hermitian SYK and
//!   2×2 symmetry-class samplers;
//! * [`decomp`] — singular values, `√(H†H)`, Lanczos and the `S Σ_h T†` factorization;
//! * [`krylov`] — exact evolution on the Krylov chain and spread complexity;
//! * [`spectral`] — spacing ratios, densities, moments and the density ↔ coefficient map;
//! * [`special`] and [`analytic`] — Kummer's function and closed-form 2×2 results;
//! * [`hermitization`] — the doubled Hermitian matrix `[[0, H], [H†, 0]]`;
//! * [`stats`] and [`ensemble`] — deterministic parallel ensemble averages.

pub mod analytic;
mod dd;
pub mod decomp;
pub mod ensemble;
pub mod ensembles;
pub mod error;
pub mod hermitization;
pub mod krylov;
pub mod matrix;
pub mod optimize;
pub mod seed;
pub mod special;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use matrix::{c64, CMatrix};
