//! Topology selector: torque-gated disengagement, fixed travel latency and
//! unloaded re-engagement.
//!
//! A request is accepted only while the torque through the currently
//! engaged dog interface is below `disengage_torque`. The plant then
//! freewheels for `switch_latency`, after which the target topology engages
//! with its spring unloaded at the current position. Engaging PEA merges the
//! two bodies with a perfectly inelastic (momentum-conserving) coupling.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::params::ActuatorParams;
use crate::plant::{pea_acceleration, Mode, PeaState, PlantState, SeaState, TransitionState};
use crate::spring_hub::HubModel;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchRequest {
    pub target: Mode,
    pub issued_at: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SwitchOutcome {
    Completed,
    Rejected,
}

/// One switch attempt as logged by the harness.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SwitchRecord {
    pub request_time: f64,
    /// Engagement time; equals `request_time` for rejected attempts.
    pub engage_time: f64,
    pub from: Mode,
    pub to: Mode,
    /// Transmitted torque at the request instant (Nm).
    pub request_torque: f64,
    pub outcome: SwitchOutcome,
    /// Kinetic energy dissipated by the engagement (J).
    pub energy_loss: f64,
}

impl SwitchRecord {
    pub fn latency(&self) -> f64 {
        self.engage_time - self.request_time
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SwitchDecision {
    Accepted(TransitionState),
    Rejected { torque: f64 },
}

/// Torque through the engaged interface (Nm). SEA: the spring torque. PEA:
/// the rigid-path reaction τ_m − J_m·α, which is τ_m at rest.
pub fn transmitted_torque(
    state: &PlantState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> Result<f64> {
    match state {
        PlantState::Sea(s) => Ok(hub.torque(s.deflection())),
        PlantState::Pea(s) => {
            let alpha = pea_acceleration(s, tau_m, tau_ext, p, hub)?;
            Ok(tau_m - p.motor_inertia * alpha)
        }
        PlantState::Transition(_) => Err(Error::Transitioning),
    }
}

/// Gate a switch request. Rejection is a normal outcome; requests to the
/// mode already engaged, or while travelling, are errors.
pub fn request_switch(
    req: SwitchRequest,
    state: &PlantState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> Result<SwitchDecision> {
    let current = state.mode().ok_or(Error::Transitioning)?;
    if current == req.target {
        return Err(Error::BadArgument(alloc::format!(
            "switch target {} is already engaged",
            req.target
        )));
    }
    let torque = transmitted_torque(state, tau_m, tau_ext, p, hub)?;
    if !(libm::fabs(torque) < p.disengage_torque) {
        return Ok(SwitchDecision::Rejected { torque });
    }
    let [theta_m, omega_m, theta_o, omega_o] = state.kinematics();
    Ok(SwitchDecision::Accepted(TransitionState {
        theta_m,
        omega_m,
        theta_o,
        omega_o,
        target: req.target,
        t_remaining: p.switch_latency,
    }))
}

/// Outcome of one selector tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Advance {
    Travelling(TransitionState),
    Engaged { state: PlantState, energy_loss: f64 },
}

impl Advance {
    pub fn state(&self) -> PlantState {
        match *self {
            Advance::Travelling(s) => PlantState::Transition(s),
            Advance::Engaged { state, .. } => state,
        }
    }
}

/// Count down the selector travel by `dt` and engage once it has elapsed.
pub fn advance_selector(state: TransitionState, dt: f64, p: &ActuatorParams) -> Advance {
    let remaining = state.t_remaining - dt;
    // Tolerate rounding so a latency that is an exact multiple of dt
    // engages on that step.
    if remaining > 1e-9 * dt {
        return Advance::Travelling(TransitionState {
            t_remaining: remaining,
            ..state
        });
    }
    engage(&state, p)
}

/// Finalize engagement of `state.target` at the current kinematics.
pub fn engage(state: &TransitionState, p: &ActuatorParams) -> Advance {
    let TransitionState {
        theta_m,
        omega_m,
        theta_o,
        omega_o,
        target,
        ..
    } = *state;
    match target {
        Mode::Pea => {
            let (jm, jo) = (p.motor_inertia, p.output_inertia);
            let omega = (jm * omega_m + jo * omega_o) / (jm + jo);
            let before = 0.5 * jm * omega_m * omega_m + 0.5 * jo * omega_o * omega_o;
            let after = 0.5 * (jm + jo) * omega * omega;
            Advance::Engaged {
                state: PlantState::Pea(PeaState {
                    theta: theta_o,
                    omega,
                    theta_anchor: theta_o,
                }),
                energy_loss: before - after,
            }
        }
        Mode::Sea => Advance::Engaged {
            state: PlantState::Sea(SeaState {
                theta_m,
                omega_m,
                theta_o,
                omega_o,
                beta_offset: theta_m - theta_o,
            }),
            energy_loss: 0.0,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct CycleTally {
    pub completed: usize,
    pub rejected: usize,
}

pub fn cycle_counter(records: &[SwitchRecord]) -> CycleTally {
    records.iter().fold(CycleTally::default(), |mut acc, r| {
        match r.outcome {
            SwitchOutcome::Completed => acc.completed += 1,
            SwitchOutcome::Rejected => acc.rejected += 1,
        }
        acc
    })
}

/// Checks the completed records for latency, gate and alternation. Returns
/// one message per violation.
pub fn audit_records(records: &[SwitchRecord], p: &ActuatorParams) -> Vec<alloc::string::String> {
    let mut out = Vec::new();
    let mut last_to: Option<Mode> = None;
    for (i, r) in records.iter().enumerate() {
        if r.from == r.to {
            out.push(alloc::format!("record {i}: self-transition {}", r.from));
        }
        if r.outcome != SwitchOutcome::Completed {
            continue;
        }
        if libm::fabs(r.latency() - p.switch_latency) > p.dt {
            out.push(alloc::format!(
                "record {i}: latency {} s differs from {} s by more than dt",
                r.latency(),
                p.switch_latency
            ));
        }
        if !(libm::fabs(r.request_torque) < p.disengage_torque) {
            out.push(alloc::format!(
                "record {i}: accepted with transmitted torque {} Nm",
                r.request_torque
            ));
        }
        if let Some(prev) = last_to {
            if prev != r.from {
                out.push(alloc::format!(
                    "record {i}: starts from {} but {} was engaged",
                    r.from,
                    prev
                ));
            }
        }
        last_to = Some(r.to);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Preset;

    fn setup() -> (ActuatorParams, HubModel) {
        let p = Preset::paper_full_range().params;
        (p, HubModel::linear(p.spring_stiffness))
    }

    fn req(target: Mode) -> SwitchRequest {
        SwitchRequest {
            target,
            issued_at: 0.0,
        }
    }

    #[test]
    fn transmitted_torque_cases() {
        let (p, hub) = setup();
        let unloaded = PlantState::Sea(SeaState {
            theta_m: 0.75,
            theta_o: 0.25,
            beta_offset: 0.5,
            ..SeaState::default()
        });
        assert_eq!(
            transmitted_torque(&unloaded, 0.0, 0.0, &p, &hub).unwrap(),
            0.0
        );

        let loaded = PlantState::Sea(SeaState {
            theta_m: 0.1,
            ..SeaState::default()
        });
        let t = transmitted_torque(&loaded, 0.0, 0.0, &p, &hub).unwrap();
        assert!((t - 0.557).abs() < 1e-12);

        // PEA at rest: τ_m = τ_ext + K_s·θ, α = 0, transmitted = τ_m.
        let s = PeaState {
            theta: 0.05,
            omega: 0.0,
            theta_anchor: 0.0,
        };
        let tau_ext = 0.3;
        let tau_m = tau_ext + p.spring_stiffness * 0.05;
        let t = transmitted_torque(&PlantState::Pea(s), tau_m, tau_ext, &p, &hub).unwrap();
        assert!((t - tau_m).abs() < 1e-12);

        let trans = PlantState::Transition(TransitionState {
            theta_m: 0.0,
            omega_m: 0.0,
            theta_o: 0.0,
            omega_o: 0.0,
            target: Mode::Pea,
            t_remaining: 0.01,
        });
        assert_eq!(
            transmitted_torque(&trans, 0.0, 0.0, &p, &hub),
            Err(Error::Transitioning)
        );
    }

    #[test]
    fn gate_decisions() {
        let (p, hub) = setup();
        let rest = PlantState::Sea(SeaState::default());
        match request_switch(req(Mode::Pea), &rest, 0.0, 0.0, &p, &hub).unwrap() {
            SwitchDecision::Accepted(t) => {
                assert_eq!(t.t_remaining, p.switch_latency);
                assert_eq!(t.target, Mode::Pea);
            }
            other => panic!("{other:?}"),
        }

        let loaded = PlantState::Sea(SeaState {
            theta_m: 2.0 / p.spring_stiffness,
            ..SeaState::default()
        });
        match request_switch(req(Mode::Pea), &loaded, 0.0, 0.0, &p, &hub).unwrap() {
            SwitchDecision::Rejected { torque } => assert!((torque - 2.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }

        let pea = PlantState::Pea(PeaState::default());
        assert!(matches!(
            request_switch(req(Mode::Sea), &pea, 0.5, 0.5, &p, &hub).unwrap(),
            SwitchDecision::Accepted(_)
        ));
        assert!(request_switch(req(Mode::Pea), &pea, 0.0, 0.0, &p, &hub).is_err());
    }

    #[test]
    fn pea_unpacks_shared_coordinate() {
        let (p, hub) = setup();
        let pea = PlantState::Pea(PeaState {
            theta: 0.7,
            omega: -1.5,
            theta_anchor: 0.7,
        });
        let SwitchDecision::Accepted(t) =
            request_switch(req(Mode::Sea), &pea, 0.0, 0.0, &p, &hub).unwrap()
        else {
            panic!()
        };
        assert_eq!(
            (t.theta_m, t.omega_m, t.theta_o, t.omega_o),
            (0.7, -1.5, 0.7, -1.5)
        );
    }

    #[test]
    fn countdown_then_engage() {
        let (p, _) = setup();
        let t = TransitionState {
            theta_m: 0.0,
            omega_m: 2.0,
            theta_o: 0.0,
            omega_o: 2.0,
            target: Mode::Pea,
            t_remaining: 0.01,
        };
        match advance_selector(t, p.dt, &p) {
            Advance::Travelling(n) => assert!((n.t_remaining - (0.01 - p.dt)).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        let last = TransitionState {
            t_remaining: p.dt,
            ..t
        };
        match advance_selector(last, p.dt, &p) {
            Advance::Engaged {
                state: PlantState::Pea(s),
                energy_loss,
            } => {
                assert_eq!(s.omega, 2.0);
                assert!(energy_loss.abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pea_engagement_conserves_momentum() {
        let (p, _) = setup();
        let t = TransitionState {
            theta_m: 0.3,
            omega_m: 1.0,
            theta_o: -0.2,
            omega_o: 0.0,
            target: Mode::Pea,
            t_remaining: 0.0,
        };
        let Advance::Engaged {
            state: PlantState::Pea(s),
            energy_loss,
        } = engage(&t, &p)
        else {
            panic!()
        };
        let jm = p.motor_inertia;
        let jo = p.output_inertia;
        assert!((s.omega - jm / (jm + jo)).abs() < 1e-15);
        assert_eq!(s.theta, -0.2);
        assert_eq!(s.theta_anchor, -0.2);
        assert!(energy_loss > 0.0);
    }

    #[test]
    fn sea_engagement_is_unloaded() {
        let (p, hub) = setup();
        let t = TransitionState {
            theta_m: 0.9,
            omega_m: 0.1,
            theta_o: -0.25,
            omega_o: 0.4,
            target: Mode::Sea,
            t_remaining: 0.0,
        };
        let state = engage(&t, &p).state();
        assert_eq!(state.spring_torque(&hub), 0.0);
        assert_eq!(state.kinematics(), [0.9, 0.1, -0.25, 0.4]);
    }

    #[test]
    fn tallies() {
        assert_eq!(cycle_counter(&[]), CycleTally::default());
        let rec = |outcome| SwitchRecord {
            request_time: 0.0,
            engage_time: 0.0,
            from: Mode::Sea,
            to: Mode::Pea,
            request_torque: 0.0,
            outcome,
            energy_loss: 0.0,
        };
        let all: Vec<_> = (0..324).map(|_| rec(SwitchOutcome::Completed)).collect();
        assert_eq!(
            cycle_counter(&all),
            CycleTally {
                completed: 324,
                rejected: 0
            }
        );
        let mixed = [
            rec(SwitchOutcome::Completed),
            rec(SwitchOutcome::Rejected),
            rec(SwitchOutcome::Rejected),
        ];
        assert_eq!(
            cycle_counter(&mixed),
            CycleTally {
                completed: 1,
                rejected: 2
            }
        );
    }

    #[test]
    fn gate_is_strict() {
        let (mut p, hub) = setup();
        p.disengage_torque = 0.5;
        let at_limit = PlantState::Sea(SeaState {
            theta_m: 0.5 / p.spring_stiffness,
            ..SeaState::default()
        });
        let torque = transmitted_torque(&at_limit, 0.0, 0.0, &p, &hub).unwrap();
        let d = request_switch(req(Mode::Pea), &at_limit, 0.0, 0.0, &p, &hub).unwrap();
        assert_eq!(torque >= 0.5, matches!(d, SwitchDecision::Rejected { .. }));
    }
}
