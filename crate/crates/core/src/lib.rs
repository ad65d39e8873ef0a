//! Simulation core for a dual-topology elastic actuator: a single radial
//! spring hub that a dog-clutch selector connects either in series between
//! motor and output (SEA) or in parallel between housing and output (PEA).
//!
//! The crate is `no_std` (it needs `alloc` for traces and reports). File
//! formats, presets on disk and the command-line harness live in the `dtea`
//! crate.
//!
//! Layout:
//! - [`params`]: physical parameters, named presets and validation.
//! - [`spring_hub`]: the four-spring radial hub torque model.
//! - [`plant`]: mode-dependent equations of motion and the RK4 step.
//! - [`selector`]: torque-gated topology switching with latency.
//! - [`control`]: motor-side P controller and command profiles.
//! - [`sim`]: a stepping driver combining plant, selector and trace logging.
//! - [`experiments`]: the characterization protocols and their metrics.

#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` style checks are how NaN gets rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod control;
pub mod error;
pub mod experiments;
pub mod params;
pub mod plant;
pub mod selector;
pub mod sim;
pub mod spring_hub;

pub use error::{Error, ParamError, Result};
pub use params::{ActuatorParams, HubGeometry, LoadModel, Preset};
pub use plant::{Mode, ModeTag, PlantState};
pub use spring_hub::{HubModel, SpringHub};
