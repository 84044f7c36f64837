//! Success, outage and coverage probabilities for successive interference
//! cancellation (SIC) in multi-tier Poisson cellular networks, together with
//! an independent Monte Carlo simulator of the cancellation chain.
//!
//! Modules:
//! - [`numerics`]: the interference integral `C(b, α)`, ₂F₁, quadrature.
//! - [`model`]: tiers, stochastic equivalence, association, distance laws.
//! - [`analytic`]: closed-form probabilities for every association policy.
//! - [`montecarlo`]: seeded, thread-count-independent estimators.
//! - [`experiments`]: figure presets, sweeps, CSV and plot-script output.

pub mod analytic;
pub mod montecarlo;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numerics;

pub use error::{Error, Result};
