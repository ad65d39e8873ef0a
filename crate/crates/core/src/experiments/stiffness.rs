//! Locked-output static stiffness protocol.
//!
//! The output is clamped to ground (gravity is taken by the fixture) and the
//! motor follows the quasi-static torque cycle 0 → +1 → 0 → −1 → 0 Nm. The
//! stiffness is the least-squares slope of τ_m against θ_m over all cycles;
//! hysteresis is the mean enclosed loop area per cycle.

use alloc::vec::Vec;

use crate::control::TorqueCycle;
use crate::error::{Error, Result};
use crate::experiments::metrics::{hysteresis_area, linear_fit};
use crate::experiments::trace::{Trace, TraceRow};
use crate::params::{validate, Preset};
use crate::plant::{step_locked, LockedOutputState, Mode, ModeTag, SimClock};
use crate::spring_hub::HubModel;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Which hub torque law the characterization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum HubLaw {
    /// Linear at the configured actuator stiffness.
    #[default]
    Configured,
    /// Geometric nonlinear model of the hub.
    Geometric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StiffnessConfig {
    pub cycle: TorqueCycle,
    /// Rate at which (θ_m, τ_m) pairs are sampled for the fit (Hz).
    pub sample_rate: f64,
    pub hub_law: HubLaw,
}

impl Default for StiffnessConfig {
    fn default() -> Self {
        StiffnessConfig {
            cycle: TorqueCycle::default(),
            sample_rate: 200.0,
            hub_law: HubLaw::Configured,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct StiffnessReport {
    pub mode: Mode,
    /// Pooled least-squares slope (Nm/rad).
    pub stiffness: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Mean per-cycle loop area (Nm·rad).
    pub loop_area: f64,
    pub cycle_loop_areas: Vec<f64>,
    pub cycle_stiffness: Vec<f64>,
    /// (θ_m, τ_m) per cycle, each closed on the first sample of the next.
    pub samples: Vec<Vec<(f64, f64)>>,
}

pub fn run_static_stiffness(
    mode: Mode,
    preset: &Preset,
    cfg: &StiffnessConfig,
) -> Result<(Trace, StiffnessReport)> {
    validate(preset)?;
    if !(cfg.cycle.ramp_rate > 0.0) || !(cfg.cycle.amplitude > 0.0) || cfg.cycle.cycles == 0 {
        return Err(Error::BadArgument(
            "torque cycle needs positive amplitude, ramp rate and cycles".into(),
        ));
    }
    let p = &preset.params;
    let hub = match cfg.hub_law {
        HubLaw::Configured => HubModel::linear(p.spring_stiffness),
        HubLaw::Geometric => HubModel::nonlinear(preset.hub),
    };
    let every = libm::round(1.0 / (cfg.sample_rate * p.dt)).max(1.0) as u64;
    let steps = libm::round(cfg.cycle.duration() / p.dt) as u64;
    let period = cfg.cycle.period();

    let mut state = LockedOutputState::new(mode);
    let mut clock = SimClock::new(p.dt);
    let mut trace = Trace::new(p.dt * every as f64);
    let mut samples: Vec<Vec<(f64, f64)>> = (0..cfg.cycle.cycles).map(|_| Vec::new()).collect();

    for k in 0..=steps {
        let t = clock.t();
        let tau = cfg.cycle.at(t);
        if k % every == 0 || k == steps {
            let point = (state.theta_m, tau);
            let idx = libm::floor(t / period) as usize;
            if let Some(cur) = samples.get_mut(idx) {
                cur.push(point);
            }
            // Close the previous cycle on this cycle's first point.
            if idx >= 1 {
                if let Some(prev) = samples.get_mut(idx - 1) {
                    if prev.last() != Some(&point)
                        && libm::fabs(t - idx as f64 * period) < 0.5 * every as f64 * p.dt
                    {
                        prev.push(point);
                    }
                }
            }
            trace.push(TraceRow {
                t,
                mode: ModeTag::from(mode),
                theta_m: state.theta_m,
                omega_m: state.omega_m,
                theta_o: 0.0,
                omega_o: 0.0,
                tau_cmd: tau,
                tau_applied: tau.clamp(-p.torque_limit, p.torque_limit),
                tau_spring: hub.torque(state.theta_m),
                i_q: tau.clamp(-p.torque_limit, p.torque_limit) / p.torque_constant,
            });
        }
        if k == steps {
            break;
        }
        let (next, c, _) = step_locked(&state, clock, tau, p, &hub)?;
        state = next;
        clock = c;
    }

    let pooled: Vec<(f64, f64)> = samples.iter().flatten().copied().collect();
    let fit = linear_fit(&pooled)?;
    let mut cycle_loop_areas = Vec::with_capacity(samples.len());
    let mut cycle_stiffness = Vec::with_capacity(samples.len());
    for cyc in &samples {
        cycle_loop_areas.push(hysteresis_area(cyc)?);
        cycle_stiffness.push(linear_fit(cyc)?.slope);
    }
    let loop_area = cycle_loop_areas.iter().sum::<f64>() / cycle_loop_areas.len() as f64;
    Ok((
        trace,
        StiffnessReport {
            mode,
            stiffness: fit.slope,
            stderr: fit.stderr,
            intercept: fit.intercept,
            loop_area,
            cycle_loop_areas,
            cycle_stiffness,
            samples,
        },
    ))
}
