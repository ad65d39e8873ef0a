//! Position tracking with periodic topology switches.

use alloc::vec::Vec;

use crate::control::{p_position, Sinusoid, TRACKING_GAIN};
use crate::error::{Error, Result};
use crate::experiments::metrics::{peak_abs, rms};
use crate::experiments::trace::Trace;
use crate::params::Preset;
use crate::plant::{Mode, ModeTag, PeaState, PlantState, SeaState};
use crate::selector::SwitchRecord;
use crate::sim::Simulation;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Arm hanging straight down.
pub const HANGING: f64 = -core::f64::consts::FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TrackingConfig {
    pub duration: f64,
    pub switch_period: f64,
    pub kp: f64,
    pub reference: Sinusoid,
    /// Angle the sinusoid oscillates about (rad).
    pub center: f64,
    pub initial_mode: Mode,
    /// Give up if a requested switch has not been accepted after this long (s).
    pub max_retry: f64,
}

impl Default for TrackingConfig {
    fn default() -> Self {
        TrackingConfig {
            duration: 30.0,
            switch_period: 5.0,
            kp: TRACKING_GAIN,
            reference: Sinusoid::default(),
            center: HANGING,
            initial_mode: Mode::Sea,
            max_retry: 5.0,
        }
    }
}

impl TrackingConfig {
    pub fn target(&self, t: f64) -> f64 {
        self.center + self.reference.at(t)
    }

    /// Number of switch requests issued in the run.
    pub fn requests(&self) -> usize {
        libm::floor(self.duration / self.switch_period + 1e-9) as usize
    }
}

/// Current and error statistics over one contiguous engaged interval.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SegmentStats {
    pub mode: Mode,
    pub start: f64,
    pub end: f64,
    pub rms_current: f64,
    pub peak_current: f64,
    /// RMS of target − θ_m (rad).
    pub rms_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ModeStats {
    pub rms_current: f64,
    pub peak_current: f64,
    pub rms_error: f64,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TrackingReport {
    pub segments: Vec<SegmentStats>,
    pub sea: Option<ModeStats>,
    pub pea: Option<ModeStats>,
    pub switches: Vec<SwitchRecord>,
    /// Gate rejections absorbed by retrying on later steps.
    pub retries: usize,
    /// Time the last switch engaged; the run extends past `duration` to it.
    pub end_time: f64,
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

fn engaged(tag: ModeTag) -> Option<Mode> {
    match tag {
        ModeTag::Sea => Some(Mode::Sea),
        ModeTag::Pea => Some(Mode::Pea),
        ModeTag::Trans => None,
    }
}

pub fn run_dynamic_switching(
    preset: &Preset,
    cfg: &TrackingConfig,
) -> Result<(Trace, TrackingReport)> {
    if !(cfg.duration > 0.0) || !(cfg.switch_period > 0.0) {
        return Err(Error::BadArgument(
            "duration and switch period must be positive".into(),
        ));
    }
    let mut sim =
        Simulation::from_preset(preset, initial_state(cfg.initial_mode, cfg.target(0.0)))?
            .record_trace(1);
    let n_requests = cfg.requests();
    let mut issued = 0usize;
    let mut waiting: Option<f64> = None;
    let mut retries = 0usize;

    loop {
        let t = sim.t();
        let done = sim.records().len() == n_requests && !sim.is_transitioning();
        if t >= cfg.duration && done && waiting.is_none() {
            break;
        }
        let tau = p_position(cfg.target(t), sim.state().motor_angle(), cfg.kp);
        if waiting.is_none()
            && issued < n_requests
            && t >= (issued + 1) as f64 * cfg.switch_period - 0.5 * sim.params().dt
        {
            waiting = Some(t);
            issued += 1;
        }
        if let (Some(since), Some(mode)) = (waiting, sim.state().mode()) {
            if sim.try_switch(mode.other(), tau, false)?.accepted() {
                waiting = None;
            } else {
                retries += 1;
                if t - since > cfg.max_retry {
                    return Err(Error::InvariantViolation(alloc::format!(
                        "switch requested at {since} s still gated at {t} s"
                    )));
                }
            }
        }
        sim.advance(tau, 0.0)?;
    }

    let end_time = sim.t();
    let (trace, switches) = sim.into_parts();
    let trace = trace.unwrap_or_default();
    let p = &preset.params;

    let mut segments = Vec::new();
    let mut pooled: [(Vec<f64>, Vec<f64>); 2] = Default::default();
    for (tag, lo, hi) in trace.segments() {
        let Some(mode) = engaged(tag) else { continue };
        let rows = &trace.rows[lo..hi];
        let current: Vec<f64> = rows.iter().map(|r| r.i_q).collect();
        let error: Vec<f64> = rows.iter().map(|r| cfg.target(r.t) - r.theta_m).collect();
        segments.push(SegmentStats {
            mode,
            start: rows[0].t,
            end: rows[rows.len() - 1].t + trace.interval,
            rms_current: rms(&current)?,
            peak_current: peak_abs(&current),
            rms_error: rms(&error)?,
        });
        let slot = &mut pooled[mode as usize];
        slot.0.extend_from_slice(&current);
        slot.1.extend_from_slice(&error);
    }
    let stats = |(current, error): &(Vec<f64>, Vec<f64>)| -> Result<Option<ModeStats>> {
        if current.is_empty() {
            return Ok(None);
        }
        Ok(Some(ModeStats {
            rms_current: rms(current)?,
            peak_current: peak_abs(current),
            rms_error: rms(error)?,
            time: current.len() as f64 * p.dt,
        }))
    };
    let report = TrackingReport {
        sea: stats(&pooled[Mode::Sea as usize])?,
        pea: stats(&pooled[Mode::Pea as usize])?,
        segments,
        switches,
        retries,
        end_time,
    };
    Ok((trace, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn short_run_bookkeeping() {
        let cfg = TrackingConfig {
            duration: 3.0,
            switch_period: 1.0,
            ..TrackingConfig::default()
        };
        let (trace, report) = run_dynamic_switching(&Preset::calibrated(), &cfg).unwrap();
        assert_eq!(report.switches.len(), 3);
        assert!(trace.is_uniform(1e-9));
        // The last switch lands at the end of the run.
        assert_eq!(report.segments.len(), 3);
        assert_eq!(report.segments[0].mode, Mode::Sea);
        assert_eq!(report.segments[1].mode, Mode::Pea);
        let first = report.switches[0];
        assert!(first.request_time >= 1.0 - 1e-9);
    }

    #[test]
    fn request_count() {
        let cfg = TrackingConfig::default();
        assert_eq!(cfg.requests(), 6);
        let odd = TrackingConfig {
            duration: 29.9,
            ..cfg
        };
        assert_eq!(odd.requests(), 5);
    }
}
