//! Secrecy-region analysis for directional modulation with a random
//! frequency diverse array (RFDA).
//!
//! Modules build on each other bottom-up:
//!
//! * [`array`]: phase shifts, steering vectors, correlations, beampatterns.
//! * [`freq`]: frequency-increment design and the reference table.
//! * [`security`]: artificial noise, SNR/SINR, capacities and lower bounds.
//! * [`region`]: boundary correlation, ellipse axes, minimum resources.
//! * [`harness`]: scenarios, Monte Carlo, sweeps.
//! * [`output`]: CSV, manifest and SVG emission.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod array;
pub mod eigen;
pub mod error;
pub mod freq;
pub mod harness;
pub mod output;
pub mod par;
pub mod region;
pub mod rng;
pub mod scenario;
pub mod security;

pub use error::{Error, Result};
