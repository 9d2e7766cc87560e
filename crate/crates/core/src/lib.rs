//! Simulation and numerical verification laboratory for a semi-discrete
//! directed polymer in a Brownian environment.
//!
//! The library is organized bottom-up:
//!
//! - [`specfun`]: polygamma functions, the limit-shape free energy, and the
//!   constants derived from the characteristic tilt.
//! - [`rng`]: counter-based Gaussian streams so every environment is a pure
//!   function of (seed, level, grid index).
//! - [`stats`]: compensated summation, confidence intervals, and the
//!   goodness-of-fit machinery the verification suites share.
//! - [`environment`]: discretized Brownian driving noise on a shared grid.
//! - [`logweight`]: log-domain arithmetic, including streaming log-sum-exp.
//! - [`polymer`]: the discrete partition-function engine and its variants
//!   (constrained sums, crossing decompositions, stationary boundaries).
//! - [`gibbs`]: exact path sampling from the quenched polymer measure.
//! - [`identity`]: distributional identities checked by Monte Carlo.
//! - [`watermelon`]: the multi-path lower-bound construction.
//! - [`experiments`]: tail-probability experiments and their file outputs.

pub mod environment;
pub mod error;
pub mod logweight;
pub mod rng;
pub mod specfun;
pub mod stats;

pub use error::{CoreError, Result};
