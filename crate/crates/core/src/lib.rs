//! Exact, iteratively refinable enclosures of Brownian paths.
//!
//! The crate builds upper and lower piecewise-constant processes that sandwich
//! a Brownian bridge almost surely and tighten as more information about the
//! path is unveiled. Every random decision is made by comparing a uniform draw
//! against alternating partial sums of the bridge escape-probability series, so
//! no step carries truncation error.
//!
//! Layout, bottom up:
//!
//! - [`alt_series`]: escape/containment series, alternating bounds, and the
//!   retrospective comparison primitive.
//! - [`layer_events`]: joint-extrema probabilities and the discrete samplers
//!   built on them.
//! - [`bridge_sampling`]: the exact midpoint sampler (rejection from an
//!   analytic envelope).
//! - [`layers`]: intersection layers with refinement and bisection.
//! - [`eps_strong`]: the generation loop and the dominating processes.
//! - [`estimators`]: unbiased estimators driven by monotone functional bounds.
//! - [`options`]: barrier/Asian pricing functionals, the Euler baseline and the
//!   hitting-time indicator.
//! - [`tan_diffusion`]: exact transitions of `dX = -tan(X) dt + dW`.

pub mod alt_series;
pub mod bridge_sampling;
pub mod eps_strong;
pub mod error;
pub mod estimators;
pub mod layer_events;
pub mod layers;
pub mod normal;
pub mod options;
pub mod rng;
pub mod stats;
pub mod tan_diffusion;

pub use error::{Error, Result};

/// Default cap on alternating-series levels before a comparison is reported
/// as undecided.
pub const DEFAULT_MAX_TERMS: usize = 1000;
