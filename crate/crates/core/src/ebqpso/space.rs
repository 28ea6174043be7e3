use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box-bounded search domain. The optimizer works on `[0, 1]^d`; this type
/// maps between that unit cube and the caller's coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Search this dimension in log10 of the coordinate.
    pub log_scale: Vec<bool>,
    /// Round this dimension to an integer on decode.
    pub integer_dims: Vec<bool>,
}

/// Result of mapping a point into the unit cube.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: Vec<f64>,
    /// Set when the input lay outside the box and was clamped.
    pub clamped: bool,
}

impl SearchSpace {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        log_scale: Vec<bool>,
        integer_dims: Vec<bool>,
    ) -> Result<Self> {
        let space = SearchSpace {
            lower,
            upper,
            log_scale,
            integer_dims,
        };
        space.validate()?;
        Ok(space)
    }

    /// Same linear bounds in every dimension.
    pub fn uniform(lower: f64, upper: f64, dim: usize) -> Result<Self> {
        SearchSpace::new(
            vec![lower; dim],
            vec![upper; dim],
            vec![false; dim],
            vec![false; dim],
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Collapsed dimensions (`lower == upper`) are allowed and always decode
    /// to their single value.
    pub fn validate(&self) -> Result<()> {
        let d = self.lower.len();
        if d == 0 {
            return Err(Error::invalid("search space needs at least one dimension"));
        }
        if self.upper.len() != d || self.log_scale.len() != d || self.integer_dims.len() != d {
            return Err(Error::invalid("search space vectors differ in length"));
        }
        for j in 0..d {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !(lo.is_finite() && hi.is_finite()) || lo > hi {
                return Err(Error::invalid(format!(
                    "dimension {j}: bounds [{lo}, {hi}] are not ordered"
                )));
            }
            if self.log_scale[j] && lo <= 0.0 {
                return Err(Error::invalid(format!(
                    "dimension {j}: log-scale search needs a positive lower bound"
                )));
            }
        }
        Ok(())
    }

    fn transformed_bounds(&self, j: usize) -> (f64, f64) {
        if self.log_scale[j] {
            (self.lower[j].log10(), self.upper[j].log10())
        } else {
            (self.lower[j], self.upper[j])
        }
    }

    /// Min-max scaling of each coordinate (log10 first for log dims).
    pub fn normalize(&self, x: &[f64]) -> Normalized {
        let mut clamped = false;
        let values = x
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let mut v = v;
                if v < self.lower[j] {
                    v = self.lower[j];
                    clamped = true;
                } else if v > self.upper[j] {
                    v = self.upper[j];
                    clamped = true;
                }
                let (lo, hi) = self.transformed_bounds(j);
                if hi == lo {
                    return 0.0;
                }
                let t = if self.log_scale[j] { v.log10() } else { v };
                ((t - lo) / (hi - lo)).clamp(0.0, 1.0)
            })
            .collect();
        Normalized { values, clamped }
    }

    /// Inverse of [`normalize`](Self::normalize); integer dimensions are
    /// rounded and kept inside the bounds.
    pub fn denormalize(&self, z: &[f64]) -> Vec<f64> {
        z.iter()
            .enumerate()
            .map(|(j, &u)| {
                let (lo, hi) = self.transformed_bounds(j);
                let t = u.clamp(0.0, 1.0) * (hi - lo) + lo;
                let mut v = if self.log_scale[j] { 10f64.powf(t) } else { t };
                v = v.clamp(self.lower[j], self.upper[j]);
                if self.integer_dims[j] {
                    v = v.round().clamp(self.lower[j].ceil(), self.upper[j].floor());
                }
                v
            })
            .collect()
    }
}
