//! Point-forecast accuracy metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Aligned actual and predicted sequences.
#[derive(Debug, Clone, Copy)]
pub struct EvalPair<'a> {
    pub actual: &'a [f64],
    pub predicted: &'a [f64],
}

impl<'a> EvalPair<'a> {
    pub fn new(actual: &'a [f64], predicted: &'a [f64]) -> Result<Self> {
        if actual.is_empty() || actual.len() != predicted.len() {
            return Err(Error::invalid(format!(
                "actual ({}) and predicted ({}) must have equal non-zero lengths",
                actual.len(),
                predicted.len()
            )));
        }
        if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
            return Err(Error::invalid("metrics require finite values"));
        }
        Ok(EvalPair { actual, predicted })
    }

    fn n(&self) -> f64 {
        self.actual.len() as f64
    }

    fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        self.actual.iter().zip(self.predicted).map(|(y, p)| y - p)
    }
}

pub fn mae(p: &EvalPair) -> f64 {
    p.errors().map(f64::abs).sum::<f64>() / p.n()
}

pub fn mse(p: &EvalPair) -> f64 {
    p.errors().map(|e| e * e).sum::<f64>() / p.n()
}

pub fn rmse(p: &EvalPair) -> f64 {
    mse(p).sqrt()
}

/// Mean absolute percentage error, in percent.
pub fn mape(p: &EvalPair) -> Result<f64> {
    let zeros: Vec<usize> = p
        .actual
        .iter()
        .enumerate()
        .filter(|(_, &y)| y == 0.0)
        .map(|(i, _)| i)
        .collect();
    if !zeros.is_empty() {
        return Err(Error::ZeroActual { indices: zeros });
    }
    let sum: f64 = p
        .actual
        .iter()
        .zip(p.predicted)
        .map(|(y, f)| ((y - f) / y).abs())
        .sum();
    Ok(sum / p.n() * 100.0)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn actual_spread(p: &EvalPair) -> Result<(f64, f64)> {
    let m = mean(p.actual);
    let ss: f64 = p.actual.iter().map(|y| (y - m) * (y - m)).sum();
    if ss == 0.0 {
        return Err(Error::Degenerate("actual series has zero variance".into()));
    }
    Ok((m, ss))
}

/// Coefficient of determination.
pub fn r2(p: &EvalPair) -> Result<f64> {
    let (_, ss_tot) = actual_spread(p)?;
    let ss_res: f64 = p.errors().map(|e| e * e).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// Pearson correlation between actual and predicted.
pub fn cc(p: &EvalPair) -> Result<f64> {
    let (my, ss_y) = actual_spread(p)?;
    let mp = mean(p.predicted);
    let ss_p: f64 = p.predicted.iter().map(|v| (v - mp) * (v - mp)).sum();
    if ss_p == 0.0 {
        return Err(Error::Degenerate("predicted series has zero variance".into()));
    }
    let cov: f64 = p
        .actual
        .iter()
        .zip(p.predicted)
        .map(|(y, f)| (y - my) * (f - mp))
        .sum();
    Ok((cov / (ss_y * ss_p).sqrt()).clamp(-1.0, 1.0))
}

/// All five metrics for one evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSet {
    pub rmse: f64,
    pub mae: f64,
    pub mape_pct: f64,
    pub r2: f64,
    pub cc: f64,
}

impl MetricSet {
    pub fn compute(actual: &[f64], predicted: &[f64]) -> Result<Self> {
        let p = EvalPair::new(actual, predicted)?;
        Ok(MetricSet {
            rmse: rmse(&p),
            mae: mae(&p),
            mape_pct: mape(&p)?,
            r2: r2(&p)?,
            cc: cc(&p)?,
        })
    }

    /// JSON object with every value rounded to six significant digits.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "rmse": significant(self.rmse, 6),
            "mae": significant(self.mae, 6),
            "mape_pct": significant(self.mape_pct, 6),
            "r2": significant(self.r2, 6),
            "cc": significant(self.cc, 6),
        })
    }
}

/// Rounds to `digits` significant digits.
pub fn significant(v: f64, digits: usize) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v)
        .parse()
        .unwrap_or(v)
}
