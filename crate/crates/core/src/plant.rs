//! Mode-dependent rigid-body dynamics and fixed-step RK4 integration.
//!
//! SEA: two inertias coupled by the hub spring,
//!
//! ```text
//! J_m·α_m = τ_m − τ_s − b_m·ω_m − τ_f
//! J_o·α_o = τ_s − τ_ext − b_o·ω_o              τ_s = hub(θ_m − θ_o − β_offset)
//! ```
//!
//! PEA: one rigid body with the spring grounded to the housing,
//!
//! ```text
//! (J_m + J_o)·α = τ_m − hub(θ − θ_anchor) − τ_ext − (b_m + b_o)·ω − τ_f
//! ```
//!
//! Coulomb friction τ_f acts on the motor shaft, with a magnitude that
//! depends on which dog is engaged. During a topology transition both torque paths are open and
//! the two bodies move independently.

use crate::error::{Error, Result};
use crate::params::{ActuatorParams, LoadModel};
use crate::spring_hub::HubModel;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Engaged topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum Mode {
    Sea,
    Pea,
}

impl Mode {
    pub fn other(self) -> Mode {
        match self {
            Mode::Sea => Mode::Pea,
            Mode::Pea => Mode::Sea,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sea => "SEA",
            Mode::Pea => "PEA",
        }
    }
}

impl core::fmt::Display for Mode {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Mode column of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "UPPERCASE"))]
pub enum ModeTag {
    Sea,
    Pea,
    Trans,
}

impl ModeTag {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeTag::Sea => "SEA",
            ModeTag::Pea => "PEA",
            ModeTag::Trans => "TRANS",
        }
    }

    pub fn parse(s: &str) -> Option<ModeTag> {
        match s {
            "SEA" => Some(ModeTag::Sea),
            "PEA" => Some(ModeTag::Pea),
            "TRANS" => Some(ModeTag::Trans),
            _ => None,
        }
    }
}

impl From<Mode> for ModeTag {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Sea => ModeTag::Sea,
            Mode::Pea => ModeTag::Pea,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SeaState {
    pub theta_m: f64,
    pub omega_m: f64,
    pub theta_o: f64,
    pub omega_o: f64,
    /// Relative angle at which the spring carries no torque.
    pub beta_offset: f64,
}

impl SeaState {
    pub fn deflection(&self) -> f64 {
        self.theta_m - self.theta_o - self.beta_offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PeaState {
    pub theta: f64,
    pub omega: f64,
    /// Output angle at which the grounded spring carries no torque.
    pub theta_anchor: f64,
}

impl PeaState {
    pub fn deflection(&self) -> f64 {
        self.theta - self.theta_anchor
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionState {
    pub theta_m: f64,
    pub omega_m: f64,
    pub theta_o: f64,
    pub omega_o: f64,
    pub target: Mode,
    /// Selector travel left before the target engages (s).
    pub t_remaining: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PlantState {
    Sea(SeaState),
    Pea(PeaState),
    Transition(TransitionState),
}

impl PlantState {
    pub fn tag(&self) -> ModeTag {
        match self {
            PlantState::Sea(_) => ModeTag::Sea,
            PlantState::Pea(_) => ModeTag::Pea,
            PlantState::Transition(_) => ModeTag::Trans,
        }
    }

    /// Engaged mode, `None` while transitioning.
    pub fn mode(&self) -> Option<Mode> {
        match self {
            PlantState::Sea(_) => Some(Mode::Sea),
            PlantState::Pea(_) => Some(Mode::Pea),
            PlantState::Transition(_) => None,
        }
    }

    /// (θ_m, ω_m, θ_o, ω_o); in PEA both sides report the shared coordinate.
    pub fn kinematics(&self) -> [f64; 4] {
        match *self {
            PlantState::Sea(s) => [s.theta_m, s.omega_m, s.theta_o, s.omega_o],
            PlantState::Pea(s) => [s.theta, s.omega, s.theta, s.omega],
            PlantState::Transition(s) => [s.theta_m, s.omega_m, s.theta_o, s.omega_o],
        }
    }

    pub fn motor_angle(&self) -> f64 {
        self.kinematics()[0]
    }

    pub fn output_angle(&self) -> f64 {
        self.kinematics()[2]
    }

    /// Torque in the hub spring; zero while the selector is travelling.
    pub fn spring_torque(&self, hub: &HubModel) -> f64 {
        match self {
            PlantState::Sea(s) => hub.torque(s.deflection()),
            PlantState::Pea(s) => hub.torque(s.deflection()),
            PlantState::Transition(_) => 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        let extra = match self {
            PlantState::Sea(s) => s.beta_offset,
            PlantState::Pea(s) => s.theta_anchor,
            PlantState::Transition(s) => s.t_remaining,
        };
        self.kinematics().iter().all(|v| v.is_finite()) && extra.is_finite()
    }

    /// ½J_mω_m² + ½J_oω_o² (J).
    pub fn kinetic_energy(&self, p: &ActuatorParams) -> f64 {
        let [_, wm, _, wo] = self.kinematics();
        match self {
            PlantState::Pea(s) => 0.5 * (p.motor_inertia + p.output_inertia) * s.omega * s.omega,
            _ => 0.5 * p.motor_inertia * wm * wm + 0.5 * p.output_inertia * wo * wo,
        }
    }
}

/// Integer-step simulation time; `t` is always `step_index · dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimClock {
    pub step_index: u64,
    pub dt: f64,
}

impl SimClock {
    pub fn new(dt: f64) -> Self {
        SimClock { step_index: 0, dt }
    }

    #[inline]
    pub fn t(&self) -> f64 {
        self.step_index as f64 * self.dt
    }

    pub fn tick(self) -> Self {
        SimClock {
            step_index: self.step_index + 1,
            ..self
        }
    }
}

/// Gravity torque of the arm, θ = 0 horizontal (Nm).
#[inline]
pub fn gravity_torque(theta: f64, load: &LoadModel) -> f64 {
    load.mass * load.gravity * load.radius * libm::cos(theta)
}

/// Regularized Coulomb friction τ_c·tanh(ω/ω_ε).
#[inline]
pub fn coulomb_friction(omega: f64, tau_c: f64, omega_eps: f64) -> f64 {
    tau_c * libm::tanh(omega / omega_eps)
}

/// Clamp a motor command to ±limit.
#[inline]
pub fn saturate(tau: f64, limit: f64) -> f64 {
    tau.clamp(-limit, limit)
}

fn check_finite(values: &[f64], what: &'static str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what, t: f64::NAN })
    }
}

/// (α_m, α_o) for the series topology.
pub fn sea_accelerations(
    s: &SeaState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> Result<(f64, f64)> {
    check_finite(
        &[
            s.theta_m,
            s.omega_m,
            s.theta_o,
            s.omega_o,
            s.beta_offset,
            tau_m,
            tau_ext,
        ],
        "SEA input",
    )?;
    Ok(sea_rhs(s, tau_m, tau_ext, p, hub))
}

#[inline]
fn sea_rhs(
    s: &SeaState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> (f64, f64) {
    let tau_s = hub.torque(s.deflection());
    let tau_f = coulomb_friction(s.omega_m, p.coulomb_sea, p.friction_eps);
    let alpha_m = (tau_m - tau_s - p.motor_damping * s.omega_m - tau_f) / p.motor_inertia;
    let alpha_o = (tau_s - tau_ext - p.output_damping * s.omega_o) / p.output_inertia;
    (alpha_m, alpha_o)
}

/// α for the parallel topology.
pub fn pea_acceleration(
    s: &PeaState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> Result<f64> {
    check_finite(
        &[s.theta, s.omega, s.theta_anchor, tau_m, tau_ext],
        "PEA input",
    )?;
    Ok(pea_rhs(s, tau_m, tau_ext, p, hub))
}

#[inline]
fn pea_rhs(s: &PeaState, tau_m: f64, tau_ext: f64, p: &ActuatorParams, hub: &HubModel) -> f64 {
    let tau_f = coulomb_friction(s.omega, p.coulomb_pea, p.friction_eps);
    (tau_m
        - hub.torque(s.deflection())
        - tau_ext
        - (p.motor_damping + p.output_damping) * s.omega
        - tau_f)
        / (p.motor_inertia + p.output_inertia)
}

/// (α_m, α_o) with both torque paths open.
pub fn freewheel_accelerations(
    s: &TransitionState,
    tau_m: f64,
    tau_ext: f64,
    p: &ActuatorParams,
) -> (f64, f64) {
    (
        (tau_m - p.motor_damping * s.omega_m) / p.motor_inertia,
        (-tau_ext - p.output_damping * s.omega_o) / p.output_inertia,
    )
}

/// Result of one integrator step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stepped {
    pub state: PlantState,
    pub clock: SimClock,
    /// Motor torque after saturation.
    pub tau_applied: f64,
}

#[inline]
fn rk4<const N: usize>(x: [f64; N], dt: f64, f: impl Fn(&[f64; N]) -> [f64; N]) -> [f64; N] {
    let add = |a: &[f64; N], k: &[f64; N], h: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += h * k[i];
        }
        out
    };
    let k1 = f(&x);
    let k2 = f(&add(&x, &k1, 0.5 * dt));
    let k3 = f(&add(&x, &k2, 0.5 * dt));
    let k4 = f(&add(&x, &k3, dt));
    let mut out = x;
    for i in 0..N {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// RK4 over `dt` split into `n` equal sub-steps.
#[inline]
fn rk4_sub<const N: usize>(
    x: [f64; N],
    dt: f64,
    n: u32,
    f: impl Fn(&[f64; N]) -> [f64; N],
) -> [f64; N] {
    if n <= 1 {
        return rk4(x, dt, f);
    }
    let h = dt / n as f64;
    (0..n).fold(x, |acc, _| rk4(acc, h, &f))
}

/// Sub-steps needed to keep `rate·h` at or below one, where `rate` bounds
/// the fastest decay (1/s). The tanh friction law is very stiff near zero
/// slip: its slope τ_c/ω_ε acts like a large viscous term on a small
/// inertia.
pub fn substeps(rate: f64, dt: f64) -> u32 {
    let n = libm::ceil(rate * dt);
    if n.is_finite() && n > 1.0 {
        n.min(1.0e4) as u32
    } else {
        1
    }
}

fn sea_rate(p: &ActuatorParams) -> f64 {
    (p.coulomb_sea / p.friction_eps + p.motor_damping) / p.motor_inertia
}

fn pea_rate(p: &ActuatorParams) -> f64 {
    (p.coulomb_pea / p.friction_eps + p.motor_damping + p.output_damping)
        / (p.motor_inertia + p.output_inertia)
}

/// Advance one RK4 step with zero-order-hold motor torque. `disturbance` is
/// an extra torque applied to the output in the positive direction; gravity
/// is re-evaluated at every stage. Transition countdown is the selector's
/// job, not this function's.
pub fn step(
    state: &PlantState,
    clock: SimClock,
    tau_cmd: f64,
    disturbance: f64,
    p: &ActuatorParams,
    hub: &HubModel,
    load: &LoadModel,
) -> Result<Stepped> {
    let tau_m = saturate(tau_cmd, p.torque_limit);
    let dt = clock.dt;
    let ext = |theta_o: f64| gravity_torque(theta_o, load) - disturbance;
    let next = match *state {
        PlantState::Sea(s) => {
            let n = substeps(sea_rate(p), dt);
            let x = rk4_sub([s.theta_m, s.omega_m, s.theta_o, s.omega_o], dt, n, |x| {
                let st = SeaState {
                    theta_m: x[0],
                    omega_m: x[1],
                    theta_o: x[2],
                    omega_o: x[3],
                    beta_offset: s.beta_offset,
                };
                let (am, ao) = sea_rhs(&st, tau_m, ext(x[2]), p, hub);
                [x[1], am, x[3], ao]
            });
            PlantState::Sea(SeaState {
                theta_m: x[0],
                omega_m: x[1],
                theta_o: x[2],
                omega_o: x[3],
                beta_offset: s.beta_offset,
            })
        }
        PlantState::Pea(s) => {
            let n = substeps(pea_rate(p), dt);
            let x = rk4_sub([s.theta, s.omega], dt, n, |x| {
                let st = PeaState {
                    theta: x[0],
                    omega: x[1],
                    theta_anchor: s.theta_anchor,
                };
                [x[1], pea_rhs(&st, tau_m, ext(x[0]), p, hub)]
            });
            PlantState::Pea(PeaState {
                theta: x[0],
                omega: x[1],
                theta_anchor: s.theta_anchor,
            })
        }
        PlantState::Transition(s) => {
            let x = rk4([s.theta_m, s.omega_m, s.theta_o, s.omega_o], dt, |x| {
                let st = TransitionState {
                    theta_m: x[0],
                    omega_m: x[1],
                    theta_o: x[2],
                    omega_o: x[3],
                    ..s
                };
                let (am, ao) = freewheel_accelerations(&st, tau_m, ext(x[2]), p);
                [x[1], am, x[3], ao]
            });
            PlantState::Transition(TransitionState {
                theta_m: x[0],
                omega_m: x[1],
                theta_o: x[2],
                omega_o: x[3],
                ..s
            })
        }
    };
    let clock = clock.tick();
    if !next.is_finite() {
        return Err(Error::NonFinite {
            what: "plant state",
            t: clock.t(),
        });
    }
    Ok(Stepped {
        state: next,
        clock,
        tau_applied: tau_m,
    })
}

/// Motor coordinate with the output clamped to ground. The motor deflects
/// against the hub in SEA and against hub plus structure in PEA.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LockedOutputState {
    pub mode: Mode,
    pub theta_m: f64,
    pub omega_m: f64,
}

impl LockedOutputState {
    pub fn new(mode: Mode) -> Self {
        LockedOutputState {
            mode,
            theta_m: 0.0,
            omega_m: 0.0,
        }
    }

    /// Torque resisting motor deflection (Nm).
    pub fn restoring_torque(&self, p: &ActuatorParams, hub: &HubModel) -> f64 {
        match self.mode {
            Mode::Sea => hub.torque(self.theta_m),
            Mode::Pea => hub.torque(self.theta_m) + p.structural_stiffness * self.theta_m,
        }
    }
}

pub fn locked_output_acceleration(
    s: &LockedOutputState,
    tau_m: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> f64 {
    let tau_f = coulomb_friction(s.omega_m, p.coulomb(s.mode), p.friction_eps);
    (tau_m - s.restoring_torque(p, hub) - p.motor_damping * s.omega_m - tau_f) / p.motor_inertia
}

pub fn step_locked(
    s: &LockedOutputState,
    clock: SimClock,
    tau_cmd: f64,
    p: &ActuatorParams,
    hub: &HubModel,
) -> Result<(LockedOutputState, SimClock, f64)> {
    let tau_m = saturate(tau_cmd, p.torque_limit);
    let rate = (p.coulomb(s.mode) / p.friction_eps + p.motor_damping) / p.motor_inertia;
    let x = rk4_sub(
        [s.theta_m, s.omega_m],
        clock.dt,
        substeps(rate, clock.dt),
        |x| {
            let st = LockedOutputState {
                theta_m: x[0],
                omega_m: x[1],
                ..*s
            };
            [x[1], locked_output_acceleration(&st, tau_m, p, hub)]
        },
    );
    let clock = clock.tick();
    if !(x[0].is_finite() && x[1].is_finite()) {
        return Err(Error::NonFinite {
            what: "locked-output state",
            t: clock.t(),
        });
    }
    Ok((
        LockedOutputState {
            theta_m: x[0],
            omega_m: x[1],
            ..*s
        },
        clock,
        tau_m,
    ))
}

/// Two-mass natural frequency of the free SEA, √(K(J_m+J_o)/(J_m·J_o)) / 2π (Hz).
pub fn sea_free_frequency(p: &ActuatorParams) -> f64 {
    let (jm, jo) = (p.motor_inertia, p.output_inertia);
    libm::sqrt(p.spring_stiffness * (jm + jo) / (jm * jo)) / (2.0 * core::f64::consts::PI)
}
