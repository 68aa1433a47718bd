//! Estimation of the drift parameter `θ₀` in `dX = θ₀ b(X) dt + σ dB`
//! from `N` observed copies, where `B` is a fractional Brownian motion.
//!
//! For `H > 1/2` the estimator is `θ̃_N = I_N + R_N`, with `I_N` a pathwise
//! (Young) integral term and `R_N` the fixed point of a contraction `Φ_N`
//! that stands in for the non-computable Skorokhod correction. For `H = 1/2`
//! the discrete-time least-squares estimator `V_{N,n}/D_{N,n}` is provided.
//! Both come with truncated variants and asymptotic confidence intervals.
//!
//! Modules:
//! - [`fbm`]: grids, exact fBm sampling, cross-correlation between copies
//! - [`sde`]: drift and volatility catalogs, Euler schemes, regeneration copies
//! - [`estimators`]: sufficient statistics, `Φ_N`, fixed point, intervals
//! - [`montecarlo`]: reproducible replicated experiments
//! - [`config`], [`output`] and [`cli`]: run configuration, CSV/JSON emission, subcommands

// validation uses `!(x > a)` on purpose so that NaN is rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod fbm;
pub mod linalg;
pub mod montecarlo;
pub mod output;
pub mod rng;
pub mod sde;

pub use error::{Error, Result};
