//! Truncated inverse sampling: draw samples until the running sum reaches a
//! threshold `gamma` or the sample count reaches `n`, whichever comes first,
//! and estimate the mean as `min(sum, gamma) / stop_time`.
//!
//! The crate covers the full workflow around that scheme:
//!
//! - [`bounds`]: the Chernoff-Hoeffding exponents `M_B` and `M_I` that drive
//!   every sample-size formula.
//! - [`special`]: log-space combinatorics and exact binomial / Poisson /
//!   hypergeometric tails.
//! - [`model`]: sampling plans, precision targets, the stopping rule, and the
//!   finite support of the estimator.
//! - [`dist`]: the exact distribution of the truncated estimator, coverage
//!   probabilities, and expected sample numbers.
//! - [`design`]: explicit and refined `(gamma, n)` plan design with
//!   certification of the finite-support worst-case conditions.
//! - [`intervals`]: exact confidence intervals (Clopper-Pearson and Garwood
//!   generalizations, finite-population and bounded-mean variants).
//! - [`sim`]: a deterministic Monte Carlo verification harness.

pub mod bounds;
pub mod design;
pub mod dist;
pub mod error;
pub mod intervals;
pub mod model;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
