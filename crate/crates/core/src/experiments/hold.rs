//! Static torque balance under a position hold.
//!
//! Once the held arm is at rest, the motor torque equals the load torque in
//! SEA, and the load torque plus the grounded spring torque in PEA.

use crate::control::{p_position, HOLD_GAIN};
use crate::error::{Error, Result};
use crate::params::Preset;
use crate::plant::{saturate, Mode, PeaState, PlantState, SeaState};
use crate::sim::Simulation;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HoldConfig {
    pub kp: f64,
    pub target: f64,
    /// Rest means both speeds below this (rad/s) for `rest_time` (s).
    pub rest_speed: f64,
    pub rest_time: f64,
    pub max_time: f64,
}

impl Default for HoldConfig {
    fn default() -> Self {
        HoldConfig {
            kp: HOLD_GAIN,
            target: 0.0,
            rest_speed: 1e-6,
            rest_time: 0.5,
            max_time: 300.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HoldReport {
    pub mode: Mode,
    pub settled_at: f64,
    pub theta_m: f64,
    pub theta_o: f64,
    pub tau_m: f64,
    /// Gravity torque on the arm (Nm).
    pub tau_ext: f64,
    pub tau_spring: f64,
    /// τ_m − τ_ext in SEA, τ_m − τ_ext − τ_spring in PEA (Nm).
    pub residual: f64,
}

pub fn run_hold(mode: Mode, preset: &Preset, cfg: &HoldConfig) -> Result<HoldReport> {
    let initial = match mode {
        Mode::Sea => PlantState::Sea(SeaState {
            theta_m: cfg.target,
            theta_o: cfg.target,
            ..SeaState::default()
        }),
        Mode::Pea => PlantState::Pea(PeaState {
            theta: cfg.target,
            omega: 0.0,
            theta_anchor: cfg.target,
        }),
    };
    let mut sim = Simulation::from_preset(preset, initial)?;
    let need = libm::round(cfg.rest_time / preset.params.dt) as u64;
    let mut quiet = 0u64;
    loop {
        let [theta_m, wm, theta_o, wo] = sim.state().kinematics();
        let tau_cmd = p_position(cfg.target, theta_m, cfg.kp);
        if libm::fabs(wm) < cfg.rest_speed && libm::fabs(wo) < cfg.rest_speed {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet > need {
            let tau_m = saturate(tau_cmd, preset.params.torque_limit);
            let tau_ext = sim.gravity();
            let tau_spring = sim.state().spring_torque(sim.hub());
            let residual = match mode {
                Mode::Sea => tau_m - tau_ext,
                Mode::Pea => tau_m - tau_ext - tau_spring,
            };
            return Ok(HoldReport {
                mode,
                settled_at: sim.t(),
                theta_m,
                theta_o,
                tau_m,
                tau_ext,
                tau_spring,
                residual,
            });
        }
        if sim.t() > cfg.max_time {
            return Err(Error::NotSettled { t: sim.t() });
        }
        sim.advance(tau_cmd, 0.0)?;
    }
}
