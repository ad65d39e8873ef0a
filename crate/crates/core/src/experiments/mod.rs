//! Scripted protocols and the metrics they report.

pub mod disturbance;
pub mod endurance;
pub mod hold;
pub mod metrics;
pub mod stiffness;
pub mod trace;
pub mod tracking;

pub use disturbance::{
    run_disturbance, Channel, DisturbanceConfig, DisturbanceReport, ImpactMetrics,
};
pub use endurance::{run_switch_cycle, CycleConfig, CycleReport};
pub use hold::{run_hold, HoldConfig, HoldReport};
pub use metrics::{hysteresis_area, linear_fit, peak_deflection, rms, settling_time, LinearFit};
pub use stiffness::{run_static_stiffness, HubLaw, StiffnessConfig, StiffnessReport};
pub use trace::{Trace, TraceRow};
pub use tracking::{
    run_dynamic_switching, ModeStats, SegmentStats, TrackingConfig, TrackingReport,
};
