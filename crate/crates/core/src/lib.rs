//! Invariant measures of switching (oscillating) random walks.
//!
//! A switching random walk moves by increments X₁ while nonnegative-side
//! and X₁′ while negative-side, with a coin of bias α deciding the side
//! at zero. This crate computes, exactly on lattice state spaces and via
//! Monte Carlo otherwise:
//!
//! - the ladder-height laws of the two driving walks and their renewal
//!   measures ([`ladder`], [`renewal`]);
//! - the invariant measures ν (switching ladder-heights chain), μ (the
//!   walk itself, via the renewal lifting map) and π (the chain of
//!   overshoots at zero crossings) ([`stationary`]);
//! - exact kernel application and invariance / detailed-balance residuals
//!   ([`kernels`]);
//! - seeded simulation and statistical comparisons ([`montecarlo`]).

pub mod error;
pub mod kernels;
pub mod ladder;
pub mod measures;
pub mod montecarlo;
pub mod num;
pub mod renewal;
pub mod solver;
pub mod stationary;

pub use error::{Error, Result};
pub use num::{Backend, Num};
