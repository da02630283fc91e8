//! Robust estimation of means and pairwise means by medians of block
//! statistics.
//!
//! The crate covers:
//!
//! - block construction by partition, sampling without replacement and
//!   sampling with replacement ([`sampling`]);
//! - degree-two U-statistics and Hoeffding-component estimates ([`kernels`]);
//! - Median-of-Means and Median-of-Randomized-Means ([`mean_estimators`]);
//! - medians of complete, randomized, incomplete and multi-sample
//!   U-statistics ([`ustat_estimators`]);
//! - confidence-driven planners for `(K, B)` and the certified deviation
//!   radius ([`bounds`]);
//! - seeded test laws and contamination ([`distributions`]);
//! - a Monte-Carlo harness for quadratic risks, deviation quantiles and bound
//!   coverage ([`experiments`]);
//! - robust pairwise learning: median-block mini-batch gradient descent for
//!   Mahalanobis metric learning, and a tournament over finite candidate
//!   classes ([`learning`]).
//!
//! All randomness is driven by an explicit [`Seed`].

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod learning;
pub mod mean_estimators;
pub mod rng;
pub mod sample;
pub mod sampling;
pub mod ustat_estimators;

pub use error::{Error, Result};
pub use rng::Seed;
pub use sample::Sample;
