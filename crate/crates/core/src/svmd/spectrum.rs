//! One-sided discrete Fourier representation of real series.
//!
//! Bins `0..=n/2` cover angular frequencies `2πk/n` in `[0, π]`. The inverse
//! rebuilds the Hermitian-symmetric full spectrum, which is the same as taking
//! the real part of the analytic signal whose positive bins are doubled.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Positive-frequency half of the DFT of a real series of length `len`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub len: usize,
}

impl Spectrum {
    /// A spectrum of zeros for a series of length `len`.
    pub fn zeros(len: usize) -> Self {
        Spectrum {
            bins: vec![Complex64::new(0.0, 0.0); len / 2 + 1],
            len,
        }
    }

    /// Angular frequency (rad/sample) of every bin.
    pub fn frequencies(&self) -> Vec<f64> {
        bin_frequencies(self.len)
    }

    pub fn energy(&self) -> f64 {
        self.bins.iter().map(|c| c.norm_sqr()).sum()
    }
}

pub fn bin_frequencies(len: usize) -> Vec<f64> {
    (0..=len / 2)
        .map(|k| 2.0 * PI * k as f64 / len as f64)
        .collect()
}

/// Cached forward/inverse plans for one transform length.
pub struct Transformer {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl Transformer {
    pub fn new(len: usize) -> Self {
        let mut planner = FftPlanner::new();
        Transformer {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn forward(&self, values: &[f64]) -> Result<Spectrum> {
        if values.is_empty() {
            return Err(Error::invalid("cannot transform an empty series"));
        }
        if values.len() != self.len {
            return Err(Error::invalid(format!(
                "series length {} does not match transform length {}",
                values.len(),
                self.len
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at index {i}")));
        }
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        buf.truncate(self.len / 2 + 1);
        Ok(Spectrum {
            bins: buf,
            len: self.len,
        })
    }

    pub fn inverse(&self, spectrum: &Spectrum) -> Vec<f64> {
        let n = self.len;
        debug_assert_eq!(spectrum.len, n);
        let mut full = vec![Complex64::new(0.0, 0.0); n];
        full[..spectrum.bins.len()].copy_from_slice(&spectrum.bins);
        // DC (and Nyquist for even n) must be real for a real signal.
        full[0].im = 0.0;
        if n % 2 == 0 {
            full[n / 2].im = 0.0;
        }
        for k in 1..spectrum.bins.len() {
            if n - k != k {
                full[n - k] = spectrum.bins[k].conj();
            }
        }
        self.inverse.process(&mut full);
        let scale = 1.0 / n as f64;
        full.iter().map(|c| c.re * scale).collect()
    }
}

/// One-sided spectrum of a finite, non-empty series.
pub fn spectrum(values: &[f64]) -> Result<Spectrum> {
    if values.is_empty() {
        return Err(Error::invalid("cannot transform an empty series"));
    }
    Transformer::new(values.len()).forward(values)
}

/// Real series whose one-sided spectrum is `spectrum`.
pub fn inverse_spectrum(spectrum: &Spectrum) -> Vec<f64> {
    Transformer::new(spectrum.len).inverse(spectrum)
}
