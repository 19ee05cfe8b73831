//! Distributed parallel pursuit.
//!
//! Greedy sparse recovery with side information (SIPP), vote-based support
//! fusion, and the distributed outer loop (DIPP) run over simulated sensor
//! networks. The [`analysis`] module evaluates the associated RIP-based
//! bounds and checks them numerically on small instances.
//!
//! Indices are 0-based everywhere.

pub mod analysis;
pub mod dipp;
pub mod error;
pub mod fusion;
pub mod harness;
pub mod math;
pub mod metrics;
pub mod network;
pub mod pursuit;
pub mod rng;
pub mod signal;

pub use error::{Error, Result};
