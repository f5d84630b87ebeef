//! Mutual-information decay along sampling chains.
//!
//! This crate implements the pieces needed to study how fast a Markov chain
//! "forgets" its initialization, measured by Φ-mutual information:
//!
//! * [`targets`] — Gaussian targets and generic potentials `ν ∝ exp(−f)`.
//! * [`phi`] — the Φ-divergence family (KL, χ², squared Hellinger, TV,
//!   reverse KL, reverse χ²), Fisher information, Sobolev-constant algebra,
//!   and Φ-mutual information for Gaussian joints.
//! * [`samplers`] — Langevin (Euler–Maruyama or exact OU), the unadjusted
//!   Langevin algorithm (ULA), and the proximal sampler with exact or
//!   rejection-sampling restricted Gaussian oracle.
//! * [`gaussian`] — exact closed-form joint laws and mutual information for
//!   all three chains on Gaussian targets; the ground truth everything else
//!   is checked against.
//! * [`bounds`] — the theoretical decay bounds, contraction coefficients and
//!   Sobolev-constant evolution rules, as pure calculators.
//! * [`estimation`] — plug-in Gaussian MI estimation with bootstrap
//!   confidence intervals, histogram Φ-MI, covariance diagnostics.
//!
//! The crate is `no_std`-compatible (with `alloc`); all IO and parallel
//! orchestration live in the companion CLI crate.
//!
//! ```
//! use midec_core::gaussian::ula_gaussian_mi_exact;
//!
//! // MI between X_0 and X_10 for ULA targeting N(0,1), step 0.1.
//! let mi = ula_gaussian_mi_exact(1.0, 0.1, 10, 1).unwrap();
//! assert!((mi - 0.06176462366592025).abs() < 1e-12);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod bounds;
pub mod error;
pub mod estimation;
pub mod gaussian;
pub mod linalg;
pub mod phi;
pub mod quad;
pub mod rng;
pub mod samplers;
pub mod targets;

pub use error::{Error, Result};
