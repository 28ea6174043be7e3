//! Seeded synthetic wind-speed series.
//!
//! `s(t) = 9 + 1.8 sin(2πt/72) + 0.9 sin(2πt/18 + 1) + 0.0003 t + N(0, σ²)`
//! with `σ = 0.35` by default and 1440 samples, roughly the scale of a month
//! of 20-minute averages.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub length: usize,
    pub noise_std: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            length: 1440,
            noise_std: 0.35,
            seed: 0,
        }
    }
}

/// Noise-free part of the signal at sample `t`.
pub fn clean_signal(t: usize) -> f64 {
    let t = t as f64;
    9.0 + 1.8 * (2.0 * PI * t / 72.0).sin() + 0.9 * (2.0 * PI * t / 18.0 + 1.0).sin() + 0.0003 * t
}

/// Periods of the two tones, in samples.
pub const TONE_PERIODS: [f64; 2] = [72.0, 18.0];

pub fn generate(spec: &SyntheticSpec) -> Result<Vec<f64>> {
    if spec.length == 0 {
        return Err(Error::invalid("synthetic length must be positive"));
    }
    if !(spec.noise_std >= 0.0 && spec.noise_std.is_finite()) {
        return Err(Error::invalid("synthetic noise_std must be finite and non-negative"));
    }
    let noise = Normal::new(0.0, spec.noise_std)
        .map_err(|e| Error::invalid(format!("synthetic noise_std: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    Ok((0..spec.length)
        .map(|t| clean_signal(t) + noise.sample(&mut rng))
        .collect())
}
