//! Numerics for the extended Airy₂ kernel and the statistics built on it.
//!
//! The crate is organized bottom-up:
//!
//! - [`airy`]: the Airy function `Ai` and its derivative in double precision;
//! - [`quadrature`]: Gauss-Legendre / Gauss-Laguerre rules and interval maps;
//! - [`linalg`]: the small dense kernels everything else factors through
//!   (complex LU, symmetric Jacobi eigenvalues, one-sided Jacobi SVD,
//!   Sturm-sequence bisection for tridiagonal matrices);
//! - [`kernels`]: the one-time Airy kernel and its two-time extension;
//! - [`fredholm`]: block Nyström discretization, Fredholm determinants,
//!   generating functions, Tracy-Widom F₂ and counting distributions;
//! - [`mixing`]: decay-of-correlation experiments (joint vs. factorized
//!   determinants, count covariances, semigroup trace norms);
//! - [`ensembles`]: Monte Carlo side (non-intersecting Brownian bridges,
//!   Gibbs resampling checks, GUE edge sampling).

pub mod airy;
pub mod ensembles;
pub mod error;
pub mod fredholm;
pub mod kernels;
pub mod linalg;
pub mod mixing;
pub mod quadrature;

pub use error::{Error, Result};
