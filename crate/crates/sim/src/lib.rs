//! File formats, experiment harness and command line for routing on
//! anchor-distance coordinates.
//!
//! The numerical work lives in `anchor_coords`; this crate reads scenarios,
//! draws source/destination pairs, aggregates per-trial metrics and writes
//! CSV and JSON outputs.

pub mod check;
pub mod cli;
pub mod error;
pub mod experiment;
pub mod files;

pub use error::{Result, SimError};
