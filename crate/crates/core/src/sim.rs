//! Stepping driver: plant integration, selector countdown, switch records
//! and optional trace logging behind one `advance` call per control tick.

use alloc::vec::Vec;

use crate::control::torque_to_current;
use crate::error::Result;
use crate::experiments::trace::{Trace, TraceRow};
use crate::params::{validate, ActuatorParams, LoadModel, Preset};
use crate::plant::{gravity_torque, saturate, step, Mode, PlantState, SimClock, TransitionState};
use crate::selector::{
    advance_selector, engage, request_switch, transmitted_torque, Advance, SwitchDecision,
    SwitchOutcome, SwitchRecord, SwitchRequest,
};
use crate::spring_hub::HubModel;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Pending {
    request_time: f64,
    from: Mode,
    to: Mode,
    torque: f64,
}

/// Result of a switch attempt through the driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attempt {
    Accepted { torque: f64 },
    Rejected { torque: f64 },
}

impl Attempt {
    pub fn accepted(&self) -> bool {
        matches!(self, Attempt::Accepted { .. })
    }
}

#[derive(Debug, Clone)]
pub struct Simulation {
    params: ActuatorParams,
    hub: HubModel,
    load: LoadModel,
    state: PlantState,
    clock: SimClock,
    pending: Option<Pending>,
    records: Vec<SwitchRecord>,
    trace: Option<Trace>,
    trace_every: u64,
    last_engagement: Option<Engagement>,
}

/// Kinematics on both sides of the most recent engagement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Engagement {
    pub before: TransitionState,
    pub after: PlantState,
    pub energy_loss: f64,
}

impl Simulation {
    pub fn new(
        params: ActuatorParams,
        hub: HubModel,
        load: LoadModel,
        initial: PlantState,
    ) -> Self {
        Simulation {
            params,
            hub,
            load,
            state: initial,
            clock: SimClock::new(params.dt),
            pending: None,
            records: Vec::new(),
            trace: None,
            trace_every: 1,
            last_engagement: None,
        }
    }

    /// Validated preset with the linear hub law at the configured stiffness.
    pub fn from_preset(preset: &Preset, initial: PlantState) -> Result<Self> {
        validate(preset)?;
        Ok(Simulation::new(
            preset.params,
            HubModel::linear(preset.params.spring_stiffness),
            preset.load,
            initial,
        ))
    }

    /// Log every `every`-th step.
    pub fn record_trace(mut self, every: u64) -> Self {
        let every = every.max(1);
        self.trace = Some(Trace::new(self.params.dt * every as f64));
        self.trace_every = every;
        self
    }

    pub fn params(&self) -> &ActuatorParams {
        &self.params
    }

    pub fn hub(&self) -> &HubModel {
        &self.hub
    }

    pub fn load(&self) -> &LoadModel {
        &self.load
    }

    pub fn state(&self) -> &PlantState {
        &self.state
    }

    pub fn clock(&self) -> SimClock {
        self.clock
    }

    pub fn t(&self) -> f64 {
        self.clock.t()
    }

    pub fn records(&self) -> &[SwitchRecord] {
        &self.records
    }

    pub fn trace(&self) -> Option<&Trace> {
        self.trace.as_ref()
    }

    pub fn into_parts(self) -> (Option<Trace>, Vec<SwitchRecord>) {
        (self.trace, self.records)
    }

    pub fn last_engagement(&self) -> Option<&Engagement> {
        self.last_engagement.as_ref()
    }

    pub fn is_transitioning(&self) -> bool {
        self.pending.is_some()
    }

    /// Gravity torque at the current output angle.
    pub fn gravity(&self) -> f64 {
        gravity_torque(self.state.output_angle(), &self.load)
    }

    /// Ask the selector for `target`, gating on the torque that `tau_cmd`
    /// would transmit this tick. Rejections are appended to the records only
    /// when `log_rejection` is set.
    pub fn try_switch(
        &mut self,
        target: Mode,
        tau_cmd: f64,
        log_rejection: bool,
    ) -> Result<Attempt> {
        let from = self.state.mode().ok_or(crate::Error::Transitioning)?;
        let tau_m = saturate(tau_cmd, self.params.torque_limit);
        let req = SwitchRequest {
            target,
            issued_at: self.t(),
        };
        let torque =
            transmitted_torque(&self.state, tau_m, self.gravity(), &self.params, &self.hub)?;
        match request_switch(
            req,
            &self.state,
            tau_m,
            self.gravity(),
            &self.params,
            &self.hub,
        )? {
            SwitchDecision::Accepted(trans) => {
                self.pending = Some(Pending {
                    request_time: self.t(),
                    from,
                    to: target,
                    torque,
                });
                self.state = PlantState::Transition(trans);
                if self.params.switch_latency == 0.0 {
                    self.finish(trans, engage(&trans, &self.params));
                }
                Ok(Attempt::Accepted { torque })
            }
            SwitchDecision::Rejected { torque } => {
                if log_rejection {
                    self.records.push(SwitchRecord {
                        request_time: self.t(),
                        engage_time: self.t(),
                        from,
                        to: target,
                        request_torque: torque,
                        outcome: SwitchOutcome::Rejected,
                        energy_loss: 0.0,
                    });
                }
                Ok(Attempt::Rejected { torque })
            }
        }
    }

    fn finish(&mut self, before: TransitionState, adv: Advance) -> Option<SwitchRecord> {
        let Advance::Engaged { state, energy_loss } = adv else {
            self.state = adv.state();
            return None;
        };
        self.state = state;
        self.last_engagement = Some(Engagement {
            before,
            after: state,
            energy_loss,
        });
        let pending = self.pending.take()?;
        let rec = SwitchRecord {
            request_time: pending.request_time,
            engage_time: self.t(),
            from: pending.from,
            to: pending.to,
            request_torque: pending.torque,
            outcome: SwitchOutcome::Completed,
            energy_loss,
        };
        self.records.push(rec);
        Some(rec)
    }

    /// One control tick: log, integrate, count down the selector. Returns
    /// the applied torque and the switch record if an engagement completed.
    pub fn advance(
        &mut self,
        tau_cmd: f64,
        disturbance: f64,
    ) -> Result<(f64, Option<SwitchRecord>)> {
        let tau_applied = saturate(tau_cmd, self.params.torque_limit);
        if let Some(trace) = self.trace.as_mut() {
            if self.clock.step_index.is_multiple_of(self.trace_every) {
                let [theta_m, omega_m, theta_o, omega_o] = self.state.kinematics();
                trace.push(TraceRow {
                    t: self.clock.t(),
                    mode: self.state.tag(),
                    theta_m,
                    omega_m,
                    theta_o,
                    omega_o,
                    tau_cmd,
                    tau_applied,
                    tau_spring: self.state.spring_torque(&self.hub),
                    i_q: torque_to_current(tau_applied, self.params.torque_constant),
                });
            }
        }
        let out = step(
            &self.state,
            self.clock,
            tau_cmd,
            disturbance,
            &self.params,
            &self.hub,
            &self.load,
        )?;
        self.clock = out.clock;
        self.state = out.state;
        let engaged = match self.state {
            PlantState::Transition(t) => {
                self.finish(t, advance_selector(t, self.params.dt, &self.params))
            }
            _ => None,
        };
        Ok((out.tau_applied, engaged))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{PeaState, SeaState};

    #[test]
    fn completed_switch_has_exact_latency() {
        let preset = Preset::paper_full_range();
        let mut sim =
            Simulation::from_preset(&preset, PlantState::Sea(SeaState::default())).unwrap();
        let mut load = preset.load;
        load.mass = 0.0;
        sim.load = load;
        for _ in 0..10 {
            sim.advance(0.0, 0.0).unwrap();
        }
        assert!(sim.try_switch(Mode::Pea, 0.0, true).unwrap().accepted());
        let mut done = None;
        for _ in 0..1000 {
            if let (_, Some(r)) = sim.advance(0.0, 0.0).unwrap() {
                done = Some(r);
                break;
            }
        }
        let rec = done.unwrap();
        assert_eq!(rec.from, Mode::Sea);
        assert_eq!(rec.to, Mode::Pea);
        assert!((rec.latency() - preset.params.switch_latency).abs() <= preset.params.dt);
        assert!(matches!(sim.state(), PlantState::Pea(_)));
    }

    #[test]
    fn rejection_logging_is_optional() {
        let preset = Preset::paper_full_range();
        let loaded = PlantState::Pea(PeaState::default());
        let mut sim = Simulation::from_preset(&preset, loaded).unwrap();
        // Holding the horizontal arm needs ~2.35 Nm through the rigid path.
        assert!(!sim.try_switch(Mode::Sea, 2.347, false).unwrap().accepted());
        assert!(sim.records().is_empty());
        assert!(!sim.try_switch(Mode::Sea, 2.347, true).unwrap().accepted());
        assert_eq!(sim.records().len(), 1);
    }

    #[test]
    fn trace_decimation_and_tags() {
        let preset = Preset::paper_full_range();
        let mut sim = Simulation::from_preset(&preset, PlantState::Pea(PeaState::default()))
            .unwrap()
            .record_trace(4);
        for _ in 0..400 {
            sim.advance(2.347, 0.0).unwrap();
        }
        let trace = sim.trace().unwrap();
        assert_eq!(trace.len(), 100);
        assert!(trace.is_uniform(1e-9));
        assert!(trace.rows.iter().all(|r| r.theta_m == r.theta_o));
    }
}
