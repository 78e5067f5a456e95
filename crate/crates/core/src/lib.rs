//! Offline change-point detection under local differential privacy.
//!
//! A dataset of n symbols from a finite alphabet is drawn i.i.d. from a
//! pre-change distribution P0 up to an unknown index k*, and from a
//! post-change distribution P1 from k* on. This crate provides:
//!
//! - [`detector`]: the suffix log-likelihood scan estimating k*, plus two
//!   ε-LDP variants that first privatize every symbol through the
//!   randomized response or a binary (quantize-then-flip) mechanism;
//! - [`divergence`]: total variation, KL, Rényi, symmetrized Rényi, and
//!   Chernoff information over finite alphabets;
//! - [`mechanisms`]: channel construction, pushforwards, LDP verification,
//!   and the Chernoff-optimal quantizer-threshold selection;
//! - [`sdpi`]: contraction coefficients — closed forms for symmetric
//!   channels, a binary-support numeric search, and a full-simplex oracle;
//! - [`bounds`]: finite-sample (α, β)-accuracy bounds for all three
//!   estimators and the tanh²(ε/2) privacy-cost factor;
//! - [`experiments`]: a seeded, thread-count-independent Monte Carlo
//!   harness producing accuracy curves, budget sweeps, and error-exponent
//!   ratio tables.

pub mod bounds;
pub mod detector;
pub mod divergence;
pub mod error;
pub mod experiments;
pub mod mechanisms;
pub mod rng;
pub mod sdpi;

pub use error::{Error, Result};
