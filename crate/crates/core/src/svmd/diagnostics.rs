use serde::{Deserialize, Serialize};

use super::SvmdResult;
use crate::error::{Error, Result};

/// Pairwise Pearson correlations between decomposed modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    /// Row-major, `size × size`.
    pub values: Vec<f64>,
    pub size: usize,
    /// `degenerate[i]` is set when mode `i` has zero variance; its
    /// off-diagonal entries are then reported as 0.
    pub degenerate: Vec<bool>,
}

impl CorrelationMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    /// Largest absolute off-diagonal entry (0 for a single mode).
    pub fn max_off_diagonal(&self) -> f64 {
        let mut max = 0.0f64;
        for i in 0..self.size {
            for j in 0..self.size {
                if i != j {
                    max = max.max(self.get(i, j).abs());
                }
            }
        }
        max
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.values.chunks(self.size.max(1)).map(<[f64]>::to_vec).collect()
    }
}

pub fn mode_correlation_matrix(result: &SvmdResult) -> Result<CorrelationMatrix> {
    let modes: Vec<&[f64]> = result.modes.iter().map(|m| m.values.as_slice()).collect();
    correlation_matrix(&modes)
}

pub(crate) fn correlation_matrix(series: &[&[f64]]) -> Result<CorrelationMatrix> {
    if series.is_empty() {
        return Err(Error::invalid("correlation matrix needs at least one mode"));
    }
    let n = series[0].len();
    if series.iter().any(|s| s.len() != n) || n == 0 {
        return Err(Error::invalid("modes must share a non-zero length"));
    }
    let centered: Vec<Vec<f64>> = series
        .iter()
        .map(|s| {
            let mean = s.iter().sum::<f64>() / n as f64;
            s.iter().map(|v| v - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centered
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let degenerate: Vec<bool> = norms.iter().map(|&v| v == 0.0).collect();

    let size = series.len();
    let mut values = vec![0.0; size * size];
    for i in 0..size {
        values[i * size + i] = 1.0;
        for j in (i + 1)..size {
            let rho = if degenerate[i] || degenerate[j] {
                0.0
            } else {
                let dot: f64 = centered[i].iter().zip(&centered[j]).map(|(a, b)| a * b).sum();
                (dot / (norms[i] * norms[j])).clamp(-1.0, 1.0)
            };
            values[i * size + j] = rho;
            values[j * size + i] = rho;
        }
    }
    Ok(CorrelationMatrix {
        values,
        size,
        degenerate,
    })
}
