//! Output-encoder measurement model.

use dtea_core::experiments::Trace;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// One count of a 14-bit absolute encoder (deg).
pub const ENCODER_LSB_DEG: f64 = 360.0 / 16384.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub enabled: bool,
    /// Quantization step (deg); zero disables quantization.
    pub quantization_deg: f64,
    /// Standard deviation of additive Gaussian noise (deg).
    pub sigma_deg: f64,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            enabled: false,
            quantization_deg: ENCODER_LSB_DEG,
            sigma_deg: 0.033,
            seed: 0,
        }
    }
}

impl NoiseModel {
    pub fn encoder(seed: u64) -> Self {
        NoiseModel {
            enabled: true,
            seed,
            ..NoiseModel::default()
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.sigma_deg >= 0.0) || !self.sigma_deg.is_finite() {
            return Err(format!(
                "noise sigma must be non-negative, got {}",
                self.sigma_deg
            ));
        }
        if !(self.quantization_deg >= 0.0) || !self.quantization_deg.is_finite() {
            return Err(format!(
                "quantization must be non-negative, got {}",
                self.quantization_deg
            ));
        }
        Ok(())
    }
}

/// Quantizes, then perturbs, the output angle of every row. Motor-side
/// columns pass through untouched.
pub fn apply_noise(trace: &Trace, model: &NoiseModel) -> Trace {
    let mut out = trace.clone();
    if !model.enabled {
        return out;
    }
    let q = model.quantization_deg.to_radians();
    let sigma = model.sigma_deg.to_radians();
    let normal = Normal::new(0.0, sigma).ok();
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    for row in &mut out.rows {
        let mut theta = row.theta_o;
        if q > 0.0 {
            theta = (theta / q).round() * q;
        }
        if let Some(n) = normal.filter(|_| sigma > 0.0) {
            theta += n.sample(&mut rng);
        }
        row.theta_o = theta;
    }
    out
}
