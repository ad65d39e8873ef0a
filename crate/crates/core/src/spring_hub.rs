//! Radial spring hub torque model.
//!
//! Four extension springs sit at 90° intervals between an inner plate
//! (hooks at radius r1) and an outer plate (hooks at r2). For a relative
//! plate rotation β the hook distance is
//!
//! ```text
//! l(β) = √(r1² + r2² − 2·r1·r2·cos β)
//! ```
//!
//! and the restoring torque is
//!
//! ```text
//! τ(β) = 4·k·r1·r2·(1 − l0 / l_eff(β))·sin β,    l_eff(β) = l(β) + (l_p − l(0))
//! ```
//!
//! The constant assembly offset `l_p − l(0)` makes the installed length at
//! β = 0 equal the preloaded length `l_p`, so the slope at the origin is
//! exactly `4·k·r1·r2·(1 − l0/l_p)`.

use crate::error::{Error, Result};
use crate::params::HubGeometry;

/// N/mm · mm · mm → N·m
const NMM_TO_NM: f64 = 1.0e-3;

/// Geometry-derived hub with its precomputed assembly offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpringHub {
    geometry: HubGeometry,
    preload_offset: f64,
}

impl SpringHub {
    pub fn new(geometry: HubGeometry) -> Self {
        let collinear = geometry.collinear_length();
        SpringHub {
            geometry,
            preload_offset: geometry.preload_length() - collinear,
        }
    }

    pub fn geometry(&self) -> &HubGeometry {
        &self.geometry
    }

    /// l_p − l(0) in mm.
    pub fn preload_offset(&self) -> f64 {
        self.preload_offset
    }

    /// Hook-to-hook distance for relative rotation `beta` (mm).
    pub fn spring_length(&self, beta: f64) -> f64 {
        let HubGeometry {
            inner_radius: r1,
            outer_radius: r2,
            ..
        } = self.geometry;
        let sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * libm::cos(beta);
        libm::sqrt(sq.max(0.0))
    }

    /// Installed spring length including the assembly offset (mm).
    pub fn effective_length(&self, beta: f64) -> f64 {
        self.spring_length(beta) + self.preload_offset
    }

    /// Restoring torque of all four springs (Nm); odd in `beta`.
    pub fn torque(&self, beta: f64) -> f64 {
        let g = &self.geometry;
        let l_eff = self.effective_length(beta);
        4.0 * g.spring_rate
            * g.inner_radius
            * g.outer_radius
            * NMM_TO_NM
            * (1.0 - g.free_length / l_eff)
            * libm::sin(beta)
    }

    /// Small-deflection stiffness 4·k·r1·r2·(1 − l0/l_p) (Nm/rad).
    pub fn linearized_stiffness(&self) -> Result<f64> {
        let g = &self.geometry;
        let l_p = g.preload_length();
        if !(l_p > g.free_length) {
            return Err(Error::NonPositiveStiffness {
                preload_length: l_p,
                free_length: g.free_length,
            });
        }
        Ok(4.0
            * g.spring_rate
            * g.inner_radius
            * g.outer_radius
            * NMM_TO_NM
            * (1.0 - g.free_length / l_p))
    }

    /// Per-spring tension at the installed length (N).
    pub fn preload_force(&self) -> f64 {
        self.geometry.spring_rate * self.geometry.preload_ext
    }
}

/// Torque law used by the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HubModel {
    /// τ = K·β with a configured stiffness.
    Linear { stiffness: f64 },
    /// Full geometric model.
    Nonlinear(SpringHub),
}

impl HubModel {
    /// Linear law with the configured actuator stiffness.
    pub fn linear(stiffness: f64) -> Self {
        HubModel::Linear { stiffness }
    }

    /// Linear law whose slope is the geometric small-deflection stiffness.
    pub fn linearized(geometry: HubGeometry) -> Result<Self> {
        Ok(HubModel::Linear {
            stiffness: SpringHub::new(geometry).linearized_stiffness()?,
        })
    }

    pub fn nonlinear(geometry: HubGeometry) -> Self {
        HubModel::Nonlinear(SpringHub::new(geometry))
    }

    #[inline]
    pub fn torque(&self, beta: f64) -> f64 {
        match self {
            HubModel::Linear { stiffness } => stiffness * beta,
            HubModel::Nonlinear(hub) => hub.torque(beta),
        }
    }

    /// Slope at β = 0.
    pub fn stiffness(&self) -> Result<f64> {
        match self {
            HubModel::Linear { stiffness } => Ok(*stiffness),
            HubModel::Nonlinear(hub) => hub.linearized_stiffness(),
        }
    }

    /// Potential energy stored at deflection `beta` (J), by quadrature for
    /// the nonlinear law.
    pub fn energy(&self, beta: f64) -> f64 {
        match self {
            HubModel::Linear { stiffness } => 0.5 * stiffness * beta * beta,
            HubModel::Nonlinear(hub) => {
                // Composite Simpson on [0, beta].
                const N: usize = 256;
                let h = beta / N as f64;
                let mut acc = hub.torque(0.0) + hub.torque(beta);
                for i in 1..N {
                    let w = if i % 2 == 1 { 4.0 } else { 2.0 };
                    acc += w * hub.torque(i as f64 * h);
                }
                acc * h / 3.0
            }
        }
    }
}
