//! Successive variational mode decomposition.
//!
//! Modes are peeled off one at a time. Each extraction runs an ADMM loop on
//! the spectrum of the current working residual; the center frequencies of
//! modes already accepted act as notch penalties so a new mode cannot settle
//! on an old one. The loop ends once the residual energy is small relative to
//! the input, a candidate mode turns out negligible, or the mode budget is
//! spent.

mod diagnostics;
pub mod spectrum;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use diagnostics::{mode_correlation_matrix, CorrelationMatrix};
pub use spectrum::{inverse_spectrum, spectrum, Spectrum, Transformer};

/// Minimum series length accepted by [`decompose`].
pub const MIN_LENGTH: usize = 8;

/// Denominator energies below this keep the previous center frequency.
const SILENT_ENERGY: f64 = 1e-30;

/// A uniformly sampled real series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub values: Vec<f64>,
    /// Informational only; all frequencies are per sample.
    pub sample_interval: f64,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Self {
        Series {
            values,
            sample_interval: 1.0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl From<Vec<f64>> for Series {
    fn from(values: Vec<f64>) -> Self {
        Series::new(values)
    }
}

/// One intrinsic mode in the time domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub values: Vec<f64>,
    /// Radians per sample, in `[0, π]`.
    pub center_frequency: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmdConfig {
    /// Bandwidth penalty; larger values give narrower modes.
    pub alpha: f64,
    /// Dual ascent step. Zero disables the multiplier update.
    pub tau: f64,
    pub inner_tol: f64,
    pub max_inner_iters: usize,
    pub max_modes: usize,
    /// Stop once residual energy / input energy drops below this.
    pub residual_energy_ratio: f64,
}

impl Default for SvmdConfig {
    fn default() -> Self {
        SvmdConfig {
            alpha: 5000.0,
            tau: 0.0,
            inner_tol: 1e-7,
            max_inner_iters: 500,
            max_modes: 10,
            residual_energy_ratio: 1e-3,
        }
    }
}

impl SvmdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::invalid("svmd alpha must be positive"));
        }
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return Err(Error::invalid("svmd tau must be non-negative"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(Error::invalid("svmd inner_tol must be positive"));
        }
        if self.max_inner_iters == 0 || self.max_modes == 0 {
            return Err(Error::invalid(
                "svmd max_inner_iters and max_modes must be positive",
            ));
        }
        if !(self.residual_energy_ratio > 0.0 && self.residual_energy_ratio < 1.0) {
            return Err(Error::invalid(
                "svmd residual_energy_ratio must lie in (0, 1)",
            ));
        }
        Ok(())
    }
}

/// Output of a single ADMM mode extraction.
#[derive(Debug, Clone)]
pub struct ExtractedMode {
    pub spectrum: Spectrum,
    pub center_frequency: f64,
    pub multiplier: Vec<Complex64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmdResult {
    pub modes: Vec<Mode>,
    pub residual: Vec<f64>,
    pub source_length: usize,
}

impl SvmdResult {
    pub fn center_frequencies(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.center_frequency).collect()
    }

    /// Element-wise sum of all modes (zeros when there are none).
    pub fn mode_sum(&self) -> Vec<f64> {
        let mut sum = vec![0.0; self.source_length];
        for mode in &self.modes {
            for (s, v) in sum.iter_mut().zip(&mode.values) {
                *s += v;
            }
        }
        sum
    }

    /// Residual energy divided by the energy of the reconstructed input.
    pub fn residual_energy_ratio(&self) -> f64 {
        let residual: f64 = self.residual.iter().map(|v| v * v).sum();
        let total: f64 = self
            .mode_sum()
            .iter()
            .zip(&self.residual)
            .map(|(m, r)| (m + r) * (m + r))
            .sum();
        if total == 0.0 {
            0.0
        } else {
            residual / total
        }
    }
}

/// Runs the ADMM iteration for one mode on `residual`.
///
/// `residual` is the spectrum of whatever has not yet been assigned to a
/// mode. `prior_center_freqs` are the center frequencies of modes already
/// extracted; the spectrum near each is suppressed.
pub fn extract_mode(
    residual: &Spectrum,
    prior_center_freqs: &[f64],
    config: &SvmdConfig,
    omega_init: f64,
) -> Result<ExtractedMode> {
    config.validate()?;
    if !(0.0..=std::f64::consts::PI).contains(&omega_init) {
        return Err(Error::invalid(format!(
            "omega_init {omega_init} outside [0, pi]"
        )));
    }
    if prior_center_freqs.iter().any(|&w| w == omega_init) {
        return Err(Error::invalid(
            "omega_init coincides with a prior center frequency",
        ));
    }

    let freqs = residual.frequencies();
    let alpha = config.alpha;
    let alpha2 = alpha * alpha;
    let bins = residual.bins.len();

    // Notch term from previously extracted modes; constant across iterations.
    let notch: Vec<f64> = freqs
        .iter()
        .map(|&w| {
            prior_center_freqs
                .iter()
                .map(|&wi| 1.0 / (alpha2 * (w - wi).powi(4)))
                .sum()
        })
        .collect();

    let zero = Complex64::new(0.0, 0.0);
    let mut u = vec![zero; bins];
    let mut next = vec![zero; bins];
    let mut lambda = vec![zero; bins];
    let mut omega = omega_init;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..config.max_inner_iters {
        iterations += 1;
        for k in 0..bins {
            let d = freqs[k] - omega;
            let a = alpha2 * d.powi(4);
            let denom = (1.0 + a) * (1.0 + 2.0 * alpha * d * d + notch[k]);
            next[k] = if denom.is_finite() {
                (residual.bins[k] + u[k] * a + lambda[k] * 0.5) / denom
            } else {
                zero
            };
        }

        let (weighted, energy) = next
            .iter()
            .zip(&freqs)
            .fold((0.0, 0.0), |(ws, es), (c, &w)| {
                let p = c.norm_sqr();
                (ws + w * p, es + p)
            });
        if energy >= SILENT_ENERGY {
            omega = weighted / energy;
        }

        if config.tau > 0.0 {
            // The unprocessed part is whatever the current mode does not explain,
            // shaped by the filter around the new center frequency.
            for k in 0..bins {
                let d = freqs[k] - omega;
                let a = alpha2 * d.powi(4);
                let unprocessed = (residual.bins[k] - next[k] + lambda[k] * 0.5) * (a / (1.0 + a));
                lambda[k] += (residual.bins[k] - (next[k] + unprocessed)) * config.tau;
            }
        }

        let change: f64 = next.iter().zip(&u).map(|(a, b)| (a - b).norm_sqr()).sum();
        let prev_norm: f64 = u.iter().map(|c| c.norm_sqr()).sum();
        std::mem::swap(&mut u, &mut next);
        let relative = if prev_norm > 0.0 {
            change / prev_norm
        } else if change == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        if relative < config.inner_tol {
            converged = true;
            break;
        }
    }

    Ok(ExtractedMode {
        spectrum: Spectrum {
            bins: u,
            len: residual.len,
        },
        center_frequency: omega,
        multiplier: lambda,
        iterations,
        converged,
    })
}

/// Picks the starting frequency for the next mode: the strongest bin of the
/// residual that does not sit on an already used center frequency.
fn initial_frequency(residual: &Spectrum, priors: &[f64]) -> Option<f64> {
    let freqs = residual.frequencies();
    let mut order: Vec<usize> = (0..residual.bins.len()).collect();
    order.sort_by(|&a, &b| {
        residual.bins[b]
            .norm_sqr()
            .total_cmp(&residual.bins[a].norm_sqr())
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .map(|k| freqs[k])
        .find(|w| priors.iter().all(|p| p != w))
}

/// Decomposes `series` into successive modes plus a residual. Extraction
/// stops once the residual energy ratio falls below the threshold, when a
/// candidate mode carries less than that share of the input energy, or at
/// `max_modes`.
pub fn decompose(series: &Series, config: &SvmdConfig) -> Result<SvmdResult> {
    config.validate()?;
    let x = &series.values;
    if x.len() < MIN_LENGTH {
        return Err(Error::invalid(format!(
            "decomposition needs at least {MIN_LENGTH} samples, got {}",
            x.len()
        )));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("non-finite value at index {i}")));
    }

    let n = x.len();
    let transformer = Transformer::new(n);
    let total_energy: f64 = x.iter().map(|v| v * v).sum();
    let mut working = x.clone();
    let mut modes: Vec<Mode> = Vec::new();

    if total_energy > 0.0 {
        while modes.len() < config.max_modes {
            let energy: f64 = working.iter().map(|v| v * v).sum();
            if energy / total_energy < config.residual_energy_ratio {
                break;
            }
            let spec = transformer.forward(&working)?;
            let priors: Vec<f64> = modes.iter().map(|m| m.center_frequency).collect();
            let Some(omega_init) = initial_frequency(&spec, &priors) else {
                break;
            };
            let extracted = extract_mode(&spec, &priors, config, omega_init)?;
            if priors.contains(&extracted.center_frequency) {
                break;
            }
            let values = transformer.inverse(&extracted.spectrum);
            let mode_energy: f64 = values.iter().map(|v| v * v).sum();
            // A mode weaker than the stopping threshold is leakage from
            // non-periodic content rather than a component; reject it.
            let floor = config.residual_energy_ratio.max(SILENT_ENERGY);
            if mode_energy < floor * total_energy {
                break;
            }
            for (w, v) in working.iter_mut().zip(&values) {
                *w -= v;
            }
            modes.push(Mode {
                values,
                center_frequency: extracted.center_frequency,
                converged: extracted.converged,
                iterations: extracted.iterations,
            });
        }
    }

    let mut result = SvmdResult {
        modes,
        residual: Vec::new(),
        source_length: n,
    };
    // Residual is defined against the input so the modes plus residual
    // reproduce it regardless of how the working copy accumulated error.
    let sum = result.mode_sum();
    result.residual = x.iter().zip(&sum).map(|(a, b)| a - b).collect();
    Ok(result)
}
