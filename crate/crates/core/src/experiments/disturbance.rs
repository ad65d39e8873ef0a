//! Disturbance rejection under motor-side position hold.
//!
//! The motor holds the arm horizontal with a P controller. Once the plant is
//! quiescent a short rectangular torque pulse hits the output, and the
//! response is scored by peak deviation and time to stay inside a ±0.5°
//! band around the pre-impact position. The loop repeats, re-settling
//! between impacts.

use alloc::vec::Vec;

use crate::control::{p_position, HOLD_GAIN};
use crate::error::{Error, Result};
use crate::experiments::metrics::{
    crossing_frequency, mean, peak_deflection, settling_time, zero_crossings,
};
use crate::experiments::trace::Trace;
use crate::params::Preset;
use crate::plant::{Mode, PeaState, PlantState, SeaState};
use crate::sim::Simulation;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Which angle the deflection metrics are taken on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Channel {
    Motor,
    /// The arm angle. Identical to the motor angle in PEA.
    #[default]
    Output,
}

/// Output-side torque pulse magnitude, tuned once so the calibrated SEA
/// response peaks near 5.2° and reused unchanged for PEA (Nm).
pub const CALIBRATED_PULSE_TORQUE: f64 = 7.0;
pub const DEFAULT_PULSE_DURATION: f64 = 0.010;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DisturbanceConfig {
    pub kp: f64,
    /// Motor position command (rad).
    pub target: f64,
    pub pulse_torque: f64,
    pub pulse_duration: f64,
    /// Settling band half-width (deg).
    pub band_deg: f64,
    pub channel: Channel,
    /// Observation window after each impact (s).
    pub window: f64,
    /// Both speeds below this for `quiet_time` counts as settled (rad/s).
    pub quiet_speed: f64,
    pub quiet_time: f64,
    /// Time budget to become quiescent before each impact (s).
    pub max_settle: f64,
    /// Log every n-th step; 0 disables the trace.
    pub trace_every: u64,
}

impl Default for DisturbanceConfig {
    fn default() -> Self {
        DisturbanceConfig {
            kp: HOLD_GAIN,
            target: 0.0,
            pulse_torque: CALIBRATED_PULSE_TORQUE,
            pulse_duration: DEFAULT_PULSE_DURATION,
            band_deg: 0.5,
            channel: Channel::Output,
            window: 6.0,
            quiet_speed: 5.0e-4,
            quiet_time: 0.1,
            max_settle: 60.0,
            trace_every: 1,
        }
    }
}

/// Impacts recorded per mode on the prototype.
pub fn default_impacts(mode: Mode) -> usize {
    match mode {
        Mode::Sea => 6,
        Mode::Pea => 5,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ImpactMetrics {
    /// Impact instant (s).
    pub time: f64,
    /// Pre-impact angle of the scored channel (rad).
    pub reference: f64,
    pub peak_deg: f64,
    /// `None` if still outside the band at the end of the window.
    pub settling_ms: Option<f64>,
    /// Sign changes of the scored error before it settles.
    pub zero_crossings: usize,
    pub motor_peak_deg: f64,
    pub motor_settling_ms: Option<f64>,
    /// Sign changes of the motor error before the scored channel settles.
    pub motor_zero_crossings: usize,
    /// Motor-error oscillation frequency from its zero crossings (Hz).
    pub motor_frequency: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DisturbanceReport {
    pub mode: Mode,
    pub channel: Channel,
    pub impacts: Vec<ImpactMetrics>,
    pub mean_peak_deg: f64,
    /// `None` if any impact failed to settle.
    pub mean_settling_ms: Option<f64>,
}

fn initial_state(mode: Mode, theta: f64) -> PlantState {
    match mode {
        Mode::Sea => PlantState::Sea(SeaState {
            theta_m: theta,
            theta_o: theta,
            ..SeaState::default()
        }),
        Mode::Pea => PlantState::Pea(PeaState {
            theta,
            omega: 0.0,
            theta_anchor: theta,
        }),
    }
}

fn channel_angle(state: &PlantState, channel: Channel) -> f64 {
    match channel {
        Channel::Motor => state.motor_angle(),
        Channel::Output => state.output_angle(),
    }
}

/// Hold until both speeds stay below `quiet_speed` for `quiet_time`.
fn hold_until_quiet(sim: &mut Simulation, cfg: &DisturbanceConfig) -> Result<()> {
    let need = libm::round(cfg.quiet_time / sim.params().dt) as u64;
    let limit = sim.t() + cfg.max_settle;
    let mut quiet = 0u64;
    while quiet < need {
        if sim.t() > limit {
            return Err(Error::NotSettled { t: sim.t() });
        }
        let [_, wm, _, wo] = sim.state().kinematics();
        if libm::fabs(wm) < cfg.quiet_speed && libm::fabs(wo) < cfg.quiet_speed {
            quiet += 1;
        } else {
            quiet = 0;
        }
        let tau = p_position(cfg.target, sim.state().motor_angle(), cfg.kp);
        sim.advance(tau, 0.0)?;
    }
    Ok(())
}

pub fn run_disturbance(
    mode: Mode,
    preset: &Preset,
    n_impacts: usize,
    cfg: &DisturbanceConfig,
) -> Result<(Trace, DisturbanceReport)> {
    if n_impacts == 0 {
        return Err(Error::BadArgument("at least one impact is required".into()));
    }
    if !(cfg.pulse_duration >= 0.0) || !(cfg.window > 0.0) || !(cfg.kp > 0.0) {
        return Err(Error::BadArgument(
            "pulse duration, window and gain must be positive".into(),
        ));
    }
    let mut sim = Simulation::from_preset(preset, initial_state(mode, cfg.target))?;
    if cfg.trace_every > 0 {
        sim = sim.record_trace(cfg.trace_every);
    }
    let dt = preset.params.dt;
    let pulse_steps = libm::round(cfg.pulse_duration / dt) as u64;
    let window_steps = libm::round(cfg.window / dt) as u64;
    let band = cfg.band_deg.to_radians();

    let mut impacts = Vec::with_capacity(n_impacts);
    for _ in 0..n_impacts {
        hold_until_quiet(&mut sim, cfg)?;
        let time = sim.t();
        let reference = channel_angle(sim.state(), cfg.channel);
        let motor_ref = sim.state().motor_angle();
        let mut scored = Vec::with_capacity(window_steps as usize);
        let mut motor = Vec::with_capacity(window_steps as usize);
        for k in 0..window_steps {
            scored.push(channel_angle(sim.state(), cfg.channel));
            motor.push(sim.state().motor_angle());
            let tau = p_position(cfg.target, sim.state().motor_angle(), cfg.kp);
            let push = if k < pulse_steps {
                cfg.pulse_torque
            } else {
                0.0
            };
            sim.advance(tau, push)?;
        }
        let settling_ms = settling_time(&scored, dt, band, reference);
        let cutoff = settling_ms.map_or(motor.len(), |ms| {
            ((ms / 1000.0 / dt) as usize).min(motor.len())
        });
        let motor_err: Vec<f64> = motor[..cutoff].iter().map(|v| v - motor_ref).collect();
        let scored_crossings = zero_crossings(&scored[..cutoff], reference).len();
        impacts.push(ImpactMetrics {
            time,
            reference,
            peak_deg: peak_deflection(&scored, reference),
            settling_ms,
            zero_crossings: scored_crossings,
            motor_peak_deg: peak_deflection(&motor, motor_ref),
            motor_settling_ms: settling_time(&motor, dt, band, motor_ref),
            motor_zero_crossings: zero_crossings(&motor_err, 0.0).len(),
            motor_frequency: crossing_frequency(&motor_err, dt, 0.0),
        });
    }

    let peaks: Vec<f64> = impacts.iter().map(|m| m.peak_deg).collect();
    let settles: Option<Vec<f64>> = impacts.iter().map(|m| m.settling_ms).collect();
    let report = DisturbanceReport {
        mode,
        channel: cfg.channel,
        mean_peak_deg: mean(&peaks),
        mean_settling_ms: settles.map(|s| mean(&s)),
        impacts,
    };
    let (trace, _) = sim.into_parts();
    Ok((trace.unwrap_or_else(|| Trace::new(dt)), report))
}
