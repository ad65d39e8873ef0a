//! Repeated topology switching under gravity load.
//!
//! The arm hangs at rest under a position hold while the selector is
//! toggled back and forth. After every engagement the selector invariants
//! are rechecked and the first violation aborts the run.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::control::{p_position, HOLD_GAIN};
use crate::error::{Error, Result};
use crate::experiments::tracking::HANGING;
use crate::params::Preset;
use crate::plant::{Mode, PlantState, SeaState};
use crate::selector::{audit_records, cycle_counter, SwitchOutcome, SwitchRecord};
use crate::sim::{Engagement, Simulation};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CycleConfig {
    pub kp: f64,
    /// Held motor angle (rad).
    pub hold: f64,
    /// Time held in each mode before the next request (s).
    pub dwell: f64,
    /// A request still gated after this long is logged as rejected (s).
    pub retry_window: f64,
}

impl Default for CycleConfig {
    fn default() -> Self {
        CycleConfig {
            kp: HOLD_GAIN,
            hold: HANGING,
            dwell: 0.25,
            retry_window: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CycleReport {
    pub requested: usize,
    pub completed: usize,
    pub rejected: usize,
    /// Gated attempts that were later accepted or timed out.
    pub retried: usize,
    pub violations: usize,
    /// Largest kinetic energy dissipated by one engagement (J).
    pub max_energy_loss: f64,
    pub max_latency_error: f64,
    pub records: Vec<SwitchRecord>,
    pub duration: f64,
}

/// Relative momentum mismatch across an engagement.
fn momentum_error(e: &Engagement, jm: f64, jo: f64) -> f64 {
    let b = &e.before;
    let before = jm * b.omega_m + jo * b.omega_o;
    let after = match e.after {
        PlantState::Pea(s) => (jm + jo) * s.omega,
        PlantState::Sea(s) => jm * s.omega_m + jo * s.omega_o,
        PlantState::Transition(_) => f64::NAN,
    };
    let scale = libm::fabs(jm * b.omega_m) + libm::fabs(jo * b.omega_o);
    if scale == 0.0 {
        libm::fabs(after)
    } else {
        libm::fabs(after - before) / scale
    }
}

fn check_engagement(sim: &Simulation, rec: &SwitchRecord, index: usize) -> Result<()> {
    let p = sim.params();
    let mut problems: Vec<String> = audit_records(core::slice::from_ref(rec), p)
        .into_iter()
        .map(|m| m.replacen("record 0", &format!("switch {index}"), 1))
        .collect();
    if rec.latency() > crate::params::MAX_PRESET_SWITCH_LATENCY + p.dt {
        problems.push(format!(
            "switch {index}: latency {} s exceeds the selector bound",
            rec.latency()
        ));
    }
    match sim.last_engagement() {
        Some(e) => {
            let err = momentum_error(e, p.motor_inertia, p.output_inertia);
            if !(err <= 1e-12) {
                problems.push(format!(
                    "switch {index}: momentum changed by {err:e} (relative)"
                ));
            }
            if !(e.energy_loss >= -1e-15) {
                problems.push(format!(
                    "switch {index}: engagement created {} J",
                    -e.energy_loss
                ));
            }
        }
        None => problems.push(format!("switch {index}: no engagement captured")),
    }
    let spring = sim.state().spring_torque(sim.hub());
    if spring != 0.0 {
        problems.push(format!(
            "switch {index}: spring engaged preloaded with {spring} Nm"
        ));
    }
    if sim.state().mode() != Some(rec.to) {
        problems.push(format!(
            "switch {index}: engaged {:?} instead of {}",
            sim.state().mode(),
            rec.to
        ));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::InvariantViolation(problems.join("; ")))
    }
}

/// Toggle the selector `n` times. The gate may be forced shut with a zero
/// disengage threshold, in which case every request is logged as rejected.
pub fn run_switch_cycle(preset: &Preset, n: usize, cfg: &CycleConfig) -> Result<CycleReport> {
    if n == 0 {
        return Err(Error::BadArgument("at least one switch is required".into()));
    }
    if !(cfg.dwell >= 0.0) || !(cfg.retry_window >= 0.0) {
        return Err(Error::BadArgument(
            "dwell and retry window must be non-negative".into(),
        ));
    }
    let mut checked = preset.clone();
    let gate_closed = checked.params.disengage_torque == 0.0;
    if gate_closed {
        checked.params.disengage_torque = 1.0;
    }
    let initial = PlantState::Sea(SeaState {
        theta_m: cfg.hold,
        theta_o: cfg.hold,
        ..SeaState::default()
    });
    let mut sim = Simulation::from_preset(&checked, initial)?;
    if gate_closed {
        let mut params = *sim.params();
        params.disengage_torque = 0.0;
        sim = Simulation::new(params, *sim.hub(), *sim.load(), initial);
    }
    let dt = preset.params.dt;
    let dwell_steps = libm::round(cfg.dwell / dt) as u64;
    let window_steps = libm::round(cfg.retry_window / dt) as u64;
    let hold = |sim: &Simulation| p_position(cfg.hold, sim.state().motor_angle(), cfg.kp);

    let mut retried = 0usize;
    let mut max_energy_loss = 0.0_f64;
    let mut max_latency_error = 0.0_f64;
    let mut completed = 0usize;
    for i in 0..n {
        for _ in 0..dwell_steps {
            sim.advance(hold(&sim), 0.0)?;
        }
        let from = sim.state().mode().ok_or(Error::Transitioning)?;
        let mut attempts = 0u64;
        loop {
            let tau = hold(&sim);
            let last_chance = attempts >= window_steps;
            if sim.try_switch(from.other(), tau, last_chance)?.accepted() {
                break;
            }
            if last_chance {
                break;
            }
            attempts += 1;
            retried += 1;
            sim.advance(tau, 0.0)?;
        }
        while sim.is_transitioning() {
            if let (_, Some(rec)) = sim.advance(hold(&sim), 0.0)? {
                check_engagement(&sim, &rec, i)?;
                completed += 1;
                max_energy_loss = max_energy_loss.max(rec.energy_loss);
                max_latency_error =
                    max_latency_error.max(libm::fabs(rec.latency() - preset.params.switch_latency));
            }
        }
    }

    let records = sim.records().to_vec();
    let completed_only: Vec<SwitchRecord> = records
        .iter()
        .filter(|r| r.outcome == SwitchOutcome::Completed)
        .copied()
        .collect();
    let audit = audit_records(&completed_only, &preset.params);
    if !audit.is_empty() {
        return Err(Error::InvariantViolation(audit.join("; ")));
    }
    let tally = cycle_counter(&records);
    debug_assert_eq!(tally.completed, completed);
    Ok(CycleReport {
        requested: n,
        completed: tally.completed,
        rejected: tally.rejected,
        retried,
        violations: 0,
        max_energy_loss,
        max_latency_error,
        records,
        duration: sim.t(),
    })
}

/// First mode engaged by the cycle run.
pub const CYCLE_START: Mode = Mode::Sea;
