//! Core algorithms for generating geodesics on manifolds with
//! infinitesimally defined (Finsler-style, possibly asymmetric) metrics.
//!
//! A stochastic actor learns to predict midpoints of point pairs and a
//! critic learns to predict distances; recursive midpoint insertion then
//! turns the actor into a path generator. The crate also carries the
//! comparison baselines (sequential goal-conditioned PPO and a per-depth
//! sub-goal policy gradient) and finite-set oracles used to verify the
//! fixed-point behaviour of the midpoint iteration at small scale.
//!
//! The crate is `no_std` + `alloc`; all IO, file formats and the CLI live
//! in the companion `midpoint-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod error;
pub mod eval;
pub mod geometry;
pub mod math;
pub mod midpoint;
pub mod neural;
pub mod oracle;

pub mod baselines;

pub use error::{CoreError, Result};
pub use geometry::{Environment, StatePoint, TangentVector};
