//! Simulation and stability analysis for one-dimensional SDEs driven by a
//! time-changed Brownian motion `B(E_t)`, where `E_t` is the inverse of a
//! β-stable subordinator.
//!
//! The crate is organised bottom-up:
//!
//! - [`clock`]: stable variates, subordinator paths, their first-passage
//!   inverse and closed-form moment oracles.
//! - [`noise`]: Brownian motion sampled at the clock's operational times.
//! - [`sde`]: coefficient models and the Euler, duality and closed-form
//!   integrators.
//! - [`lyapunov`]: the `L1V` / `L2V` operators, grid scans of the Lyapunov
//!   stability conditions and a pathwise check of the time-changed Itô formula.
//! - [`stability`]: Monte Carlo estimators of stability probabilities and the
//!   two built-in scenarios.
//! - [`cli`]: configuration and the `tcsde` subcommands.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod clock;
pub mod error;
pub mod lyapunov;
pub mod noise;
pub mod rng;
pub mod sde;
pub mod stability;
pub mod stats;

pub use error::{Error, Result};
