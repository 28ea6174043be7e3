//! Least-squares support vector regression with a Gaussian RBF kernel.
//!
//! Training solves the bordered KKT system
//!
//! ```text
//! [ 0   1ᵀ        ] [ b ]   [ 0 ]
//! [ 1   Ω + I/γ   ] [ a ] = [ y ]
//! ```
//!
//! by a Cholesky factorization of `H = Ω + I/γ` and two triangular solves:
//! with `H η = 1` and `H ν = y`, the bias is `b = 1ᵀν / 1ᵀη` and the duals
//! are `a = ν − b η`.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Condition estimates above this abort training.
pub const MAX_CONDITION: f64 = 1e12;
/// Relative KKT residual every returned model satisfies.
pub const KKT_TOLERANCE: f64 = 1e-8;

/// Row-major regression data: `targets.len()` rows of `dim` features.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub inputs: Vec<f64>,
    pub dim: usize,
    pub targets: Vec<f64>,
}

impl TrainingSet {
    pub fn new(inputs: Vec<f64>, dim: usize, targets: Vec<f64>) -> Result<Self> {
        let set = TrainingSet {
            inputs,
            dim,
            targets,
        };
        set.validate()?;
        Ok(set)
    }

    pub fn from_rows(rows: &[Vec<f64>], targets: Vec<f64>) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::invalid("ragged input rows"));
        }
        TrainingSet::new(rows.concat(), dim, targets)
    }

    /// Stride-1 lag windows: row `k` is `series[k..k+window]` and target `k`
    /// is `series[k+window]`.
    pub fn lagged(series: &[f64], window: usize) -> Result<Self> {
        if window == 0 || series.len() <= window {
            return Err(Error::invalid(format!(
                "series of length {} is too short for window {window}",
                series.len()
            )));
        }
        let rows = series.len() - window;
        let inputs: Vec<f64> = (0..rows)
            .flat_map(|k| series[k..k + window].iter().copied())
            .collect();
        TrainingSet::new(inputs, window, series[window..].to_vec())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.targets.is_empty() {
            return Err(Error::invalid("training set needs N >= 1 rows and m >= 1 features"));
        }
        if self.inputs.len() != self.dim * self.targets.len() {
            return Err(Error::invalid(format!(
                "{} input values do not form {} rows of width {}",
                self.inputs.len(),
                self.targets.len(),
                self.dim
            )));
        }
        if self.inputs.iter().chain(&self.targets).any(|v| !v.is_finite()) {
            return Err(Error::invalid("training set contains non-finite values"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LssvmHyper {
    /// Error penalty.
    pub gamma: f64,
    /// Squared kernel width.
    pub sigma2: f64,
}

impl LssvmHyper {
    pub fn new(gamma: f64, sigma2: f64) -> Result<Self> {
        let h = LssvmHyper { gamma, sigma2 };
        h.validate()?;
        Ok(h)
    }

    fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::invalid(format!("gamma must be positive, got {}", self.gamma)));
        }
        if !(self.sigma2 > 0.0 && self.sigma2.is_finite()) {
            return Err(Error::invalid(format!("sigma2 must be positive, got {}", self.sigma2)));
        }
        Ok(())
    }
}

/// A trained regressor. Serializes to a flat JSON object with `gamma`,
/// `sigma2`, `bias`, `duals` and `support_inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LssvmModel {
    #[serde(flatten)]
    pub hyper: LssvmHyper,
    pub bias: f64,
    pub duals: Vec<f64>,
    pub support_inputs: Vec<Vec<f64>>,
    #[serde(default)]
    pub kkt_residual: f64,
}

pub fn rbf_kernel(x: &[f64], x2: &[f64], sigma2: f64) -> Result<f64> {
    if x.len() != x2.len() {
        return Err(Error::invalid(format!(
            "kernel arguments differ in dimension ({} vs {})",
            x.len(),
            x2.len()
        )));
    }
    if !(sigma2 > 0.0) {
        return Err(Error::invalid("sigma2 must be positive"));
    }
    Ok(kernel(x, x2, sigma2))
}

#[inline]
fn kernel(x: &[f64], x2: &[f64], sigma2: f64) -> f64 {
    let d2: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    (-d2 / (2.0 * sigma2)).exp()
}

/// Kernel matrix Ω for the rows of `data`.
pub fn kernel_matrix(data: &TrainingSet, sigma2: f64) -> Mat<f64> {
    let n = data.len();
    let mut omega = Mat::<f64>::zeros(n, n);
    for i in 0..n {
        omega[(i, i)] = 1.0;
        let xi = data.row(i);
        for j in 0..i {
            let k = kernel(xi, data.row(j), sigma2);
            omega[(i, j)] = k;
            omega[(j, i)] = k;
        }
    }
    omega
}

struct BorderedSolver {
    chol: faer::linalg::solvers::Llt<f64>,
    eta: Mat<f64>,
    eta_sum: f64,
}

impl BorderedSolver {
    /// Solves `[0 1ᵀ; 1 H] [b; a] = [c0; c]`.
    fn solve(&self, c0: f64, c: &[f64]) -> (f64, Vec<f64>) {
        let n = c.len();
        let rhs = Mat::<f64>::from_fn(n, 1, |i, _| c[i]);
        let nu = self.chol.solve(rhs.as_ref());
        let nu_sum: f64 = (0..n).map(|i| nu[(i, 0)]).sum();
        let b = (nu_sum - c0) / self.eta_sum;
        let a = (0..n).map(|i| nu[(i, 0)] - b * self.eta[(i, 0)]).collect();
        (b, a)
    }
}

/// Residual of the bordered system: (first row, remaining rows).
fn kkt_residual(h: &Mat<f64>, b: f64, a: &[f64], y: &[f64]) -> (f64, Vec<f64>) {
    let n = y.len();
    let r0: f64 = a.iter().sum();
    let r = (0..n)
        .map(|i| {
            let ha: f64 = (0..n).map(|j| h[(i, j)] * a[j]).sum();
            b + ha - y[i]
        })
        .collect();
    (r0, r)
}

fn relative_norm(r0: f64, r: &[f64], y: &[f64]) -> f64 {
    let num = (r0 * r0 + r.iter().map(|v| v * v).sum::<f64>()).sqrt();
    let den = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

pub fn train(data: &TrainingSet, hyper: LssvmHyper) -> Result<LssvmModel> {
    data.validate()?;
    hyper.validate()?;
    let n = data.len();
    let mut h = kernel_matrix(data, hyper.sigma2);

    // Ω is positive semi-definite, so λ_min(H) ≥ 1/γ; Gershgorin bounds λ_max.
    let max_row_sum = (0..n)
        .map(|i| (0..n).map(|j| h[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let condition = hyper.gamma * max_row_sum + 1.0;
    if condition > MAX_CONDITION {
        return Err(Error::Conditioning {
            condition,
            detail: format!("gamma {} with {} samples", hyper.gamma, n),
        });
    }
    let ridge = 1.0 / hyper.gamma;
    for i in 0..n {
        h[(i, i)] += ridge;
    }

    let chol = h.as_ref().llt(Side::Lower).map_err(|e| Error::Conditioning {
        condition,
        detail: format!("Cholesky factorization failed: {e:?}"),
    })?;
    let ones = Mat::<f64>::from_fn(n, 1, |_, _| 1.0);
    let eta = chol.solve(ones.as_ref());
    let eta_sum: f64 = (0..n).map(|i| eta[(i, 0)]).sum();
    let solver = BorderedSolver { chol, eta, eta_sum };

    let y = &data.targets;
    let (mut b, mut a) = solver.solve(0.0, y);
    let (r0, r) = kkt_residual(&h, b, &a, y);
    let mut residual = relative_norm(r0, &r, y);
    if residual >= KKT_TOLERANCE {
        // One step of iterative refinement.
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let (db, da) = solver.solve(-r0, &neg);
        b += db;
        for (ai, d) in a.iter_mut().zip(&da) {
            *ai += d;
        }
        let (r0, r) = kkt_residual(&h, b, &a, y);
        residual = relative_norm(r0, &r, y);
    }
    if !(residual < KKT_TOLERANCE) || !b.is_finite() {
        return Err(Error::Conditioning {
            condition,
            detail: format!("KKT residual {residual:.3e} after refinement"),
        });
    }

    Ok(LssvmModel {
        hyper,
        bias: b,
        duals: a,
        support_inputs: (0..n).map(|i| data.row(i).to_vec()).collect(),
        kkt_residual: residual,
    })
}

impl LssvmModel {
    pub fn dim(&self) -> usize {
        self.support_inputs.first().map_or(0, Vec::len)
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::invalid(format!(
                "input dimension {} does not match model dimension {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        self.duals
            .iter()
            .zip(&self.support_inputs)
            .map(|(a, xi)| a * kernel(x, xi, self.hyper.sigma2))
            .sum::<f64>()
            + self.bias
    }

    /// Predictions for every row of a row-major matrix of width `dim()`.
    pub fn predict_rows(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        let dim = self.dim();
        if dim == 0 || inputs.len() % dim != 0 {
            return Err(Error::invalid("input matrix width does not match model"));
        }
        Ok(inputs
            .chunks(dim)
            .map(|x| self.predict_unchecked(x))
            .collect())
    }
}

/// Free-function form of [`LssvmModel::predict`].
pub fn predict(model: &LssvmModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}
