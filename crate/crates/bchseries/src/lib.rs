//! Truncated symmetric Baker-Campbell-Hausdorff series in one variable.
//!
//! This crate evaluates `log(exp(A) exp(2B) exp(A))` as a power series in the
//! matrix `B` alone, with every order of `A` retained. The order-N coefficient
//! is a closed-form combination of `sinh` and `coth` factors of eigenvalue
//! differences of `A`, so the whole truncation is computed by weighting index
//! tuples in the eigenbasis of `A` — no nested commutators are ever formed.
//! The standard two-sided form `log(exp(X) exp(Y))` is reached through the
//! Hadamard conversion in [`matops`].
//!
//! Module map:
//! - [`coeffs`] — exact tanh Taylor coefficients, ordered compositions, the
//!   dual-form `f` functions and the per-order scalar coefficient `g`.
//! - [`lattice_sums`] — constrained lattice sums, their closed forms, and the
//!   partition assembly used to validate the coefficient derivation.
//! - [`matops`] — dense complex matrix engine: eigendecomposition, exp/log,
//!   Hadamard conjugation, form conversion, and the truncated series itself.
//! - [`oracle`] — independent ground truth: direct `log(exp·exp·exp)`,
//!   polynomial-fit extraction of per-order terms, convergence-slope fits.
//! - [`verify`] — the self-check battery behind `bchseries verify`.
//! - [`cli`] — the command-line front end.
//!
//! ```
//! use bchseries::matops::BchEngine;
//! use bchseries::oracle::direct_z;
//! use bchseries::{C64, CMatrix};
//!
//! let a = CMatrix::from_fn(2, 2, |i, j| {
//!     if i == j { C64::new([0.6, -0.4][i], 0.0) } else { C64::new(0.0, 0.0) }
//! });
//! let b = CMatrix::from_fn(2, 2, |i, j| {
//!     if i != j { C64::new(0.05, 0.0) } else { C64::new(0.0, 0.0) }
//! });
//!
//! let engine = BchEngine::default();
//! let report = engine.bch_truncated(&a, &b, 3).unwrap();
//! let exact = direct_z(&a, &b).unwrap();
//! let err = (report.z - exact).norm();
//! assert!(err < 1e-5, "order-3 truncation should be tiny, got {err:.3e}");
//! ```

pub mod cli;
pub mod coeffs;
pub mod error;
pub mod lattice_sums;
pub mod matops;
pub mod oracle;
pub mod verify;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense square complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
