//! Exact manifest-distribution computations, regularity-condition checkers,
//! and identifiability experiments for monotone unidimensional item response
//! models on a uniform latent trait.
//!
//! The crate is organized bottom-up:
//!
//! * [`special`] — standard normal CDF/quantile/density and the logistic
//!   function, accurate enough to probe IRF tails.
//! * [`irf`] — parametric item response functions (normal ogive, 4PL), the
//!   uniform-trait reparameterization, closed-form derivatives, endpoint
//!   derivative limits, and checkers for the derivative-bound and
//!   tail-flatness regularity conditions.
//! * [`manifest`] — exact joint response probabilities by composite
//!   Gauss-Legendre quadrature, the Poisson-binomial rest-score law, and
//!   conditional item probabilities given rest-score events.
//! * [`recovery`] — the constructive recovery of an item's response function
//!   from manifest information alone, plus sup-difference metrics.
//! * [`experiments`] — seeded response simulation, convergence experiments,
//!   and quantitative verification of the concentration bounds the recovery
//!   argument rests on.
//! * [`cli`] — the `irt-identify` command-line front end.

// Frozen oracle constants deliberately carry more digits than f64 resolves.
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod error;
pub mod experiments;
pub mod irf;
pub mod manifest;
pub mod recovery;
pub mod special;

pub use error::{Error, Result};
