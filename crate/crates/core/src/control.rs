//! Motor-side controllers and command profiles.
//!
//! Controllers see only the motor angle. Saturation happens in the plant
//! step, so everything here returns the unsaturated command.

use core::f64::consts::PI;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Gain of the sinusoidal tracking protocol (Nm/rad).
pub const TRACKING_GAIN: f64 = 40.0;
/// Gain of the disturbance-hold protocol (Nm/rad).
pub const HOLD_GAIN: f64 = 30.0;

/// τ = Kp·(θ_tar − θ_m)
#[inline]
pub fn p_position(theta_tar: f64, theta_m: f64, kp: f64) -> f64 {
    kp * (theta_tar - theta_m)
}

/// q-axis current for a torque under the ideal torque-source model (A).
#[inline]
pub fn torque_to_current(tau: f64, kt: f64) -> f64 {
    tau / kt
}

/// Sinusoidal position reference.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Sinusoid {
    /// rad
    pub amplitude: f64,
    /// Hz
    pub frequency: f64,
}

impl Default for Sinusoid {
    /// ±20° at 1 Hz.
    fn default() -> Self {
        Sinusoid {
            amplitude: 20.0_f64.to_radians(),
            frequency: 1.0,
        }
    }
}

impl Sinusoid {
    pub fn at(&self, t: f64) -> f64 {
        self.amplitude * libm::sin(2.0 * PI * self.frequency * t)
    }
}

/// ±20°, 1 Hz tracking target (rad).
pub fn sinusoid_target(t: f64) -> f64 {
    Sinusoid::default().at(t)
}

/// Triangular torque cycle 0 → +A → 0 → −A → 0 at a constant ramp rate,
/// repeated `cycles` times and zero afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct TorqueCycle {
    /// Nm
    pub amplitude: f64,
    /// Nm/s
    pub ramp_rate: f64,
    pub cycles: u32,
}

impl Default for TorqueCycle {
    fn default() -> Self {
        TorqueCycle {
            amplitude: 1.0,
            ramp_rate: 0.2,
            cycles: 3,
        }
    }
}

impl TorqueCycle {
    /// Length of one 0 → +A → 0 → −A → 0 cycle (s).
    pub fn period(&self) -> f64 {
        4.0 * self.amplitude / self.ramp_rate
    }

    pub fn duration(&self) -> f64 {
        self.period() * self.cycles as f64
    }

    pub fn at(&self, t: f64) -> f64 {
        torque_cycle_profile(t, self)
    }
}

pub fn torque_cycle_profile(t: f64, cfg: &TorqueCycle) -> f64 {
    let period = cfg.period();
    if !(t >= 0.0) || t >= cfg.duration() {
        return 0.0;
    }
    let quarter = period / 4.0;
    let phase = t - libm::floor(t / period) * period;
    let a = cfg.amplitude;
    let ramp = cfg.ramp_rate;
    if phase < quarter {
        ramp * phase
    } else if phase < 3.0 * quarter {
        a - ramp * (phase - quarter)
    } else {
        -a + ramp * (phase - 3.0 * quarter)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn p_law_cases() {
        assert_eq!(p_position(0.3, 0.3, 40.0), 0.0);
        assert!((p_position(0.1, 0.0, 40.0) - 4.0).abs() < 1e-12);
        // −0.5° · 30 = −0.261799...
        let t = p_position(-0.5_f64.to_radians(), 0.0, 30.0);
        assert!((t + 0.2618).abs() < 1e-4);
    }

    #[test]
    fn current_cases() {
        assert!((torque_to_current(0.083, 0.083) - 1.0).abs() < 1e-15);
        assert_eq!(torque_to_current(0.0, 0.083), 0.0);
        assert!((torque_to_current(2.347, 0.083) - 28.3).abs() < 0.05);
    }

    #[test]
    fn sinusoid_cases() {
        assert_eq!(sinusoid_target(0.0), 0.0);
        assert!((sinusoid_target(0.25) - 0.349066).abs() < 1e-6);
        assert!(sinusoid_target(0.5).abs() < 1e-12);
    }

    #[test]
    fn torque_cycle_shape() {
        let cfg = TorqueCycle::default();
        assert_eq!(cfg.period(), 20.0);
        assert_eq!(cfg.at(0.0), 0.0);
        assert!((cfg.at(2.5) - 0.5).abs() < 1e-12);
        assert!((cfg.at(5.0) - 1.0).abs() < 1e-12);
        assert!(cfg.at(10.0).abs() < 1e-12);
        assert!((cfg.at(15.0) + 1.0).abs() < 1e-12);
        assert!((cfg.at(25.0) - 1.0).abs() < 1e-12);
        assert_eq!(cfg.at(60.0), 0.0);

        let dt = 1.0 / 8000.0;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=160_000 {
            let v = cfg.at(i as f64 * dt);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        assert_eq!((lo, hi), (-1.0, 1.0));
    }

    #[test]
    fn controller_is_linear_in_error() {
        let kp = 37.0;
        for (a, b) in [(0.1, 0.2), (-0.3, 0.05), (1.0, -2.0)] {
            let d = p_position(a + b, 0.0, kp) - p_position(a, 0.0, kp);
            assert!((d - kp * b).abs() < 1e-12);
        }
    }
}
