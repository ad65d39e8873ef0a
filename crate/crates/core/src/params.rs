//! Physical and protocol parameters, named presets and validation.
//!
//! All quantities are SI except inside [`HubGeometry`], which keeps the
//! spring datasheet units (N/mm and mm).

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, ParamError, Result};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Which length the hub preload extension is measured from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PreloadBasis {
    /// Installed length = free length + extension (14.55 mm for the prototype).
    #[default]
    FreeLength,
    /// Installed length = collinear hook distance + extension (14.30 mm).
    CollinearLength,
}

/// Radial spring hub: four extension springs at 90° between two plates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct HubGeometry {
    /// Per-spring rate (N/mm).
    pub spring_rate: f64,
    /// Spring free length (mm).
    pub free_length: f64,
    /// Inner hook radius (mm).
    pub inner_radius: f64,
    /// Outer hook radius (mm).
    pub outer_radius: f64,
    /// Assembly extension beyond the preload basis length (mm).
    pub preload_ext: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub preload_basis: PreloadBasis,
}

impl HubGeometry {
    /// Prototype hub, keeping the unrounded 12.701 N/mm spring rate.
    pub const PROTOTYPE: HubGeometry = HubGeometry {
        spring_rate: 12.701,
        free_length: 12.8,
        inner_radius: 25.32,
        outer_radius: 37.87,
        preload_ext: 1.75,
        preload_basis: PreloadBasis::FreeLength,
    };

    /// Collinear hook distance r2 − r1 (mm).
    pub fn collinear_length(&self) -> f64 {
        self.outer_radius - self.inner_radius
    }

    /// Installed (preloaded) spring length at zero deflection (mm).
    pub fn preload_length(&self) -> f64 {
        match self.preload_basis {
            PreloadBasis::FreeLength => self.free_length + self.preload_ext,
            PreloadBasis::CollinearLength => self.collinear_length() + self.preload_ext,
        }
    }

    pub fn validate_into(&self, errs: &mut Vec<ParamError>) {
        positive(errs, "spring_rate", self.spring_rate);
        positive(errs, "free_length", self.free_length);
        positive(errs, "inner_radius", self.inner_radius);
        if !(self.inner_radius < self.outer_radius) || !self.outer_radius.is_finite() {
            errs.push(ParamError {
                field: "outer_radius",
                value: self.outer_radius,
                message: "must exceed inner_radius (r1 < r2 required)",
            });
        }
        non_negative(errs, "preload_ext", self.preload_ext);
    }
}

/// Dog-clutch tooth counts. Engagement is allowed at any angle, so these
/// do not enter the dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct DogTeeth {
    pub inner: u32,
    pub outer: u32,
}

impl Default for DogTeeth {
    fn default() -> Self {
        DogTeeth {
            inner: 16,
            outer: 32,
        }
    }
}

/// Actuator-level physical constants and switching parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ActuatorParams {
    /// Rotor plus shaft inertia (kg·m²).
    pub motor_inertia: f64,
    /// Output-side inertia (kg·m²).
    pub output_inertia: f64,
    /// Hub torsional stiffness used by the dynamics (Nm/rad).
    pub spring_stiffness: f64,
    /// Structural stiffness added in series-locked PEA characterization (Nm/rad).
    pub structural_stiffness: f64,
    /// Viscous damping on the motor coordinate (Nm·s/rad).
    pub motor_damping: f64,
    /// Viscous damping on the output coordinate (Nm·s/rad).
    pub output_damping: f64,
    /// Coulomb friction magnitude in SEA mode (Nm).
    pub coulomb_sea: f64,
    /// Coulomb friction magnitude in PEA mode (Nm).
    pub coulomb_pea: f64,
    /// Velocity scale of the tanh friction regularization (rad/s).
    pub friction_eps: f64,
    /// Motor torque constant (Nm/A).
    pub torque_constant: f64,
    /// Motor torque saturation (Nm).
    pub torque_limit: f64,
    /// Largest transmitted torque at which the selector can disengage (Nm).
    pub disengage_torque: f64,
    /// Selector travel time between topologies (s).
    pub switch_latency: f64,
    /// Integration step (s).
    pub dt: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub dog_teeth: DogTeeth,
}

/// Upper bound on the selector latency of the shipped presets (s).
pub const MAX_PRESET_SWITCH_LATENCY: f64 = 0.03333;

impl ActuatorParams {
    /// Controller-native step, 8 kHz.
    pub const DEFAULT_DT: f64 = 1.0 / 8000.0;
    pub const DEFAULT_MOTOR_INERTIA: f64 = 5.0e-4;

    /// Open-loop PEA stiffness with the output locked.
    pub fn locked_pea_stiffness(&self) -> f64 {
        self.spring_stiffness + self.structural_stiffness
    }

    pub fn coulomb(&self, mode: crate::plant::Mode) -> f64 {
        match mode {
            crate::plant::Mode::Sea => self.coulomb_sea,
            crate::plant::Mode::Pea => self.coulomb_pea,
        }
    }

    /// Copy with all viscous and Coulomb dissipation removed.
    pub fn frictionless(&self) -> Self {
        ActuatorParams {
            motor_damping: 0.0,
            output_damping: 0.0,
            coulomb_sea: 0.0,
            coulomb_pea: 0.0,
            ..*self
        }
    }

    pub fn validate_into(&self, errs: &mut Vec<ParamError>) {
        positive(errs, "motor_inertia", self.motor_inertia);
        positive(errs, "output_inertia", self.output_inertia);
        positive(errs, "spring_stiffness", self.spring_stiffness);
        positive(errs, "structural_stiffness", self.structural_stiffness);
        non_negative(errs, "motor_damping", self.motor_damping);
        non_negative(errs, "output_damping", self.output_damping);
        non_negative(errs, "coulomb_sea", self.coulomb_sea);
        non_negative(errs, "coulomb_pea", self.coulomb_pea);
        positive(errs, "friction_eps", self.friction_eps);
        positive(errs, "torque_constant", self.torque_constant);
        positive(errs, "torque_limit", self.torque_limit);
        positive(errs, "disengage_torque", self.disengage_torque);
        non_negative(errs, "switch_latency", self.switch_latency);
        positive(errs, "dt", self.dt);
    }
}

/// Angle convention of the load: only "zero at horizontal" is supported, so
/// the gravity torque at θ = 0 is m·g·r.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum AngleConvention {
    #[default]
    HorizontalZero,
}

/// Point-mass arm on the output.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct LoadModel {
    /// kg
    pub mass: f64,
    /// m
    pub radius: f64,
    /// m/s²
    pub gravity: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub angle_convention: AngleConvention,
}

impl LoadModel {
    /// 920 g at 0.26 m.
    pub const PROTOTYPE_ARM: LoadModel = LoadModel {
        mass: 0.920,
        radius: 0.26,
        gravity: 9.81,
        angle_convention: AngleConvention::HorizontalZero,
    };

    /// Gravity torque with the arm horizontal (Nm).
    pub fn horizontal_torque(&self) -> f64 {
        self.mass * self.gravity * self.radius
    }

    /// Same arm with gravity switched off (fixture-supported output).
    pub fn weightless(&self) -> Self {
        LoadModel { mass: 0.0, ..*self }
    }

    pub fn validate_into(&self, errs: &mut Vec<ParamError>) {
        non_negative(errs, "mass", self.mass);
        non_negative(errs, "radius", self.radius);
        positive(errs, "gravity", self.gravity);
    }
}

/// Point-mass output inertia m·r² (kg·m²).
pub fn default_output_inertia(load: &LoadModel) -> f64 {
    load.mass * load.radius * load.radius
}

/// A named, complete configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Preset {
    pub name: String,
    pub params: ActuatorParams,
    pub hub: HubGeometry,
    pub load: LoadModel,
}

pub const PRESET_LINEAR_WINDOW: &str = "paper-linear-window";
pub const PRESET_FULL_RANGE: &str = "paper-full-range";
pub const PRESET_CALIBRATED: &str = "calibrated";

/// Names of every built-in preset.
pub const PRESET_NAMES: [&str; 3] = [PRESET_LINEAR_WINDOW, PRESET_FULL_RANGE, PRESET_CALIBRATED];

impl Preset {
    fn prototype(name: &str, spring_stiffness: f64, structural_stiffness: f64) -> Preset {
        let load = LoadModel::PROTOTYPE_ARM;
        Preset {
            name: String::from(name),
            params: ActuatorParams {
                motor_inertia: ActuatorParams::DEFAULT_MOTOR_INERTIA,
                output_inertia: default_output_inertia(&load),
                spring_stiffness,
                structural_stiffness,
                motor_damping: CALIBRATED_MOTOR_DAMPING,
                output_damping: CALIBRATED_OUTPUT_DAMPING,
                coulomb_sea: 0.0,
                coulomb_pea: 0.0,
                friction_eps: 1.0e-3,
                torque_constant: 0.083,
                torque_limit: 3.0,
                disengage_torque: 1.0,
                switch_latency: 0.025,
                dt: ActuatorParams::DEFAULT_DT,
                dog_teeth: DogTeeth::default(),
            },
            hub: HubGeometry::PROTOTYPE,
            load,
        }
    }

    /// Stiffnesses from the small-deflection window where both modes are
    /// linear: K_SEA = 4.09, K_PEA = 8.49 Nm/rad.
    pub fn paper_linear_window() -> Preset {
        Preset::prototype(PRESET_LINEAR_WINDOW, 4.09, 4.40)
    }

    /// Stiffnesses fitted over the full ±1 Nm cycle: K_SEA = 5.57,
    /// K_PEA = 8.54 Nm/rad.
    pub fn paper_full_range() -> Preset {
        Preset::prototype(PRESET_FULL_RANGE, 5.57, 2.97)
    }

    /// Full-range stiffnesses with dissipation tuned so the hysteresis and
    /// disturbance protocols land on the measured prototype metrics.
    pub fn calibrated() -> Preset {
        let mut p = Preset::prototype(PRESET_CALIBRATED, 5.57, 2.97);
        p.params.coulomb_sea = CALIBRATED_COULOMB_SEA;
        p.params.coulomb_pea = CALIBRATED_COULOMB_PEA;
        p
    }

    pub fn builtin(name: &str) -> Option<Preset> {
        match name {
            PRESET_LINEAR_WINDOW => Some(Preset::paper_linear_window()),
            PRESET_FULL_RANGE => Some(Preset::paper_full_range()),
            PRESET_CALIBRATED => Some(Preset::calibrated()),
            _ => None,
        }
    }

    pub fn builtins() -> Vec<Preset> {
        PRESET_NAMES
            .iter()
            .filter_map(|n| Preset::builtin(n))
            .collect()
    }
}

// Viscous damping is shared by every preset; only the calibrated one adds
// Coulomb friction.
const CALIBRATED_MOTOR_DAMPING: f64 = 0.25;
const CALIBRATED_OUTPUT_DAMPING: f64 = 0.2;
const CALIBRATED_COULOMB_SEA: f64 = 0.107;
const CALIBRATED_COULOMB_PEA: f64 = 0.049;

/// Collects every violated invariant of a preset.
pub fn validate(preset: &Preset) -> Result<()> {
    let errs = violations(preset);
    if errs.is_empty() {
        Ok(())
    } else {
        Err(Error::Invalid(errs))
    }
}

pub fn violations(preset: &Preset) -> Vec<ParamError> {
    let mut errs = Vec::new();
    preset.params.validate_into(&mut errs);
    preset.hub.validate_into(&mut errs);
    preset.load.validate_into(&mut errs);
    errs
}

fn positive(errs: &mut Vec<ParamError>, field: &'static str, value: f64) {
    if !(value > 0.0) || !value.is_finite() {
        errs.push(ParamError {
            field,
            value,
            message: "must be positive",
        });
    }
}

fn non_negative(errs: &mut Vec<ParamError>, field: &'static str, value: f64) {
    if !(value >= 0.0) || !value.is_finite() {
        errs.push(ParamError {
            field,
            value,
            message: "must be non-negative",
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spring_stiffness_is_reported() {
        let mut p = Preset::paper_full_range();
        p.params.spring_stiffness = 0.0;
        let errs = violations(&p);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "spring_stiffness");
        assert_eq!(errs[0].message, "must be positive");
    }

    #[test]
    fn equal_radii_are_reported() {
        let mut p = Preset::paper_full_range();
        p.hub.outer_radius = p.hub.inner_radius;
        let errs = violations(&p);
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].field, "outer_radius");
        assert!(errs[0].message.contains("r1 < r2"));
    }

    #[test]
    fn every_violation_is_collected() {
        let mut p = Preset::paper_full_range();
        p.params.dt = -1.0;
        p.params.coulomb_sea = f64::NAN;
        p.load.gravity = 0.0;
        let fields: Vec<_> = violations(&p).iter().map(|e| e.field).collect();
        assert_eq!(fields, ["coulomb_sea", "dt", "gravity"]);
    }

    #[test]
    fn builtin_presets_validate() {
        for preset in Preset::builtins() {
            validate(&preset).unwrap();
            assert!(preset.params.switch_latency <= MAX_PRESET_SWITCH_LATENCY);
        }
    }

    #[test]
    fn preset_pea_targets() {
        let lw = Preset::paper_linear_window().params;
        let fr = Preset::paper_full_range().params;
        assert!((lw.locked_pea_stiffness() - 8.49).abs() < 0.01);
        assert!((fr.locked_pea_stiffness() - 8.54).abs() < 0.01);
    }

    #[test]
    fn point_mass_inertia() {
        // 0.920 · 0.26² = 0.062192
        let arm = LoadModel::PROTOTYPE_ARM;
        assert!((default_output_inertia(&arm) - 0.062192).abs() < 1e-12);
        assert_eq!(default_output_inertia(&arm.weightless()), 0.0);
        let unit = LoadModel {
            mass: 1.0,
            radius: 1.0,
            ..arm
        };
        assert_eq!(default_output_inertia(&unit), 1.0);
    }

    #[test]
    fn horizontal_gravity_torque() {
        let t = LoadModel::PROTOTYPE_ARM.horizontal_torque();
        assert!((t - 2.347).abs() < 1e-3, "{t}");
    }
}
