//! File formats, measurement noise, plots and the command-line harness for
//! the `dtea-core` simulator.
//!
//! Traces are written as CSV with angles in radians. Reports and presets
//! are JSON documents carrying a `schema_version`.

// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod io;
pub mod noise;
pub mod plot;
pub mod presets;

pub use error::CliError;
pub use noise::{apply_noise, NoiseModel};
