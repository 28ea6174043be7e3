//! Single-layer LSTM regressor with a linear head on the last hidden state.
//!
//! Gates read the concatenation `z = [h_{t-1}, x_t]`. Weight matrices are
//! stored row-major with `hidden` rows and `hidden + input` columns, hidden
//! columns first. Training is full-batch Adam on the mean squared error with
//! gradients from backpropagation through time.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lssvm::TrainingSet;

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPSILON: f64 = 1e-8;
/// Samples per gradient chunk. Fixed so the reduction order never changes.
const GRADIENT_CHUNK: usize = 32;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmConfig {
    pub input_size: usize,
    pub hidden_size: usize,
    /// Sequence length fed to the network.
    pub window: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for LstmConfig {
    fn default() -> Self {
        LstmConfig {
            input_size: 1,
            hidden_size: 200,
            window: 5,
            learning_rate: 1e-5,
            epochs: 500,
            seed: 0,
        }
    }
}

impl LstmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_size == 0 || self.hidden_size == 0 || self.window == 0 || self.epochs == 0 {
            return Err(Error::invalid(
                "LSTM sizes, window and epochs must all be positive",
            ));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("LSTM learning rate must be positive"));
        }
        Ok(())
    }
}

/// Network parameters. The same shape doubles as a gradient container.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmWeights {
    pub input_size: usize,
    pub hidden_size: usize,
    pub w_f: Vec<f64>,
    pub w_i: Vec<f64>,
    pub w_c: Vec<f64>,
    pub w_o: Vec<f64>,
    pub b_f: Vec<f64>,
    pub b_i: Vec<f64>,
    pub b_c: Vec<f64>,
    pub b_o: Vec<f64>,
    pub head_w: Vec<f64>,
    pub head_b: f64,
}

impl LstmWeights {
    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        let mat = hidden_size * (hidden_size + input_size);
        LstmWeights {
            input_size,
            hidden_size,
            w_f: vec![0.0; mat],
            w_i: vec![0.0; mat],
            w_c: vec![0.0; mat],
            w_o: vec![0.0; mat],
            b_f: vec![0.0; hidden_size],
            b_i: vec![0.0; hidden_size],
            b_c: vec![0.0; hidden_size],
            b_o: vec![0.0; hidden_size],
            head_w: vec![0.0; hidden_size],
            head_b: 0.0,
        }
    }

    /// Every parameter uniform in `[-1/√hidden, 1/√hidden]`.
    pub fn init(input_size: usize, hidden_size: usize, seed: u64) -> Self {
        let mut w = LstmWeights::zeros(input_size, hidden_size);
        let bound = 1.0 / (hidden_size as f64).sqrt();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for t in w.tensors_mut() {
            for v in t.iter_mut() {
                *v = rng.gen_range(-bound..=bound);
            }
        }
        w
    }

    /// Width of the gate input `[h, x]`.
    pub fn concat_size(&self) -> usize {
        self.hidden_size + self.input_size
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    /// All parameter blocks in a fixed order; the head bias comes last.
    pub fn tensors(&self) -> [&[f64]; 10] {
        [
            &self.w_f,
            &self.w_i,
            &self.w_c,
            &self.w_o,
            &self.b_f,
            &self.b_i,
            &self.b_c,
            &self.b_o,
            &self.head_w,
            std::slice::from_ref(&self.head_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> [&mut [f64]; 10] {
        [
            &mut self.w_f,
            &mut self.w_i,
            &mut self.w_c,
            &mut self.w_o,
            &mut self.b_f,
            &mut self.b_i,
            &mut self.b_c,
            &mut self.b_o,
            &mut self.head_w,
            std::slice::from_mut(&mut self.head_b),
        ]
    }

    fn add_assign(&mut self, other: &LstmWeights) {
        for (a, b) in self.tensors_mut().into_iter().zip(other.tensors()) {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    fn check(&self) -> Result<()> {
        let (h, z) = (self.hidden_size, self.concat_size());
        if h == 0 || self.input_size == 0 {
            return Err(Error::invalid("LSTM needs positive input and hidden sizes"));
        }
        let mats = [&self.w_f, &self.w_i, &self.w_c, &self.w_o];
        let vecs = [&self.b_f, &self.b_i, &self.b_c, &self.b_o, &self.head_w];
        if mats.iter().any(|m| m.len() != h * z) || vecs.iter().any(|v| v.len() != h) {
            return Err(Error::invalid("LSTM weight shapes disagree with sizes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(hidden_size: usize) -> Self {
        CellState {
            h: vec![0.0; hidden_size],
            c: vec![0.0; hidden_size],
        }
    }
}

/// Everything one step needs for the backward pass.
#[derive(Debug, Clone)]
struct StepCache {
    z: Vec<f64>,
    f: Vec<f64>,
    i: Vec<f64>,
    g: Vec<f64>,
    o: Vec<f64>,
    c_prev: Vec<f64>,
    tanh_c: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn affine(w: &[f64], b: &[f64], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    b.iter()
        .enumerate()
        .map(|(r, bias)| {
            let row = &w[r * n..(r + 1) * n];
            bias + row.iter().zip(z).map(|(a, x)| a * x).sum::<f64>()
        })
        .collect()
}

fn step(x: &[f64], prev: &CellState, w: &LstmWeights) -> (CellState, StepCache) {
    let mut z = Vec::with_capacity(w.concat_size());
    z.extend_from_slice(&prev.h);
    z.extend_from_slice(x);
    let f: Vec<f64> = affine(&w.w_f, &w.b_f, &z).into_iter().map(sigmoid).collect();
    let i: Vec<f64> = affine(&w.w_i, &w.b_i, &z).into_iter().map(sigmoid).collect();
    let g: Vec<f64> = affine(&w.w_c, &w.b_c, &z).into_iter().map(f64::tanh).collect();
    let o: Vec<f64> = affine(&w.w_o, &w.b_o, &z).into_iter().map(sigmoid).collect();
    let c: Vec<f64> = (0..w.hidden_size)
        .map(|k| f[k] * prev.c[k] + i[k] * g[k])
        .collect();
    let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
    let h: Vec<f64> = o.iter().zip(&tanh_c).map(|(a, b)| a * b).collect();
    let cache = StepCache {
        z,
        f,
        i,
        g,
        o,
        c_prev: prev.c.clone(),
        tanh_c,
    };
    (CellState { h, c }, cache)
}

/// One LSTM time step.
pub fn cell_forward(x: &[f64], prev: &CellState, w: &LstmWeights) -> Result<CellState> {
    w.check()?;
    if x.len() != w.input_size || prev.h.len() != w.hidden_size || prev.c.len() != w.hidden_size {
        return Err(Error::invalid(format!(
            "cell_forward expects input {} and state {}, got {} and ({}, {})",
            w.input_size,
            w.hidden_size,
            x.len(),
            prev.h.len(),
            prev.c.len()
        )));
    }
    Ok(step(x, prev, w).0)
}

fn check_window(window: &[f64], w: &LstmWeights) -> Result<()> {
    if window.is_empty() || window.len() % w.input_size != 0 {
        return Err(Error::invalid(format!(
            "window of {} values is not a non-empty sequence of {}-wide steps",
            window.len(),
            w.input_size
        )));
    }
    Ok(())
}

fn unroll(window: &[f64], w: &LstmWeights) -> (CellState, Vec<StepCache>) {
    let mut state = CellState::zeros(w.hidden_size);
    let mut caches = Vec::with_capacity(window.len() / w.input_size);
    for x in window.chunks(w.input_size) {
        let (next, cache) = step(x, &state, w);
        caches.push(cache);
        state = next;
    }
    (state, caches)
}

fn head(h: &[f64], w: &LstmWeights) -> f64 {
    w.head_b + w.head_w.iter().zip(h).map(|(a, b)| a * b).sum::<f64>()
}

/// Runs the window from a zero state and applies the linear head.
pub fn sequence_forward(window: &[f64], w: &LstmWeights) -> Result<f64> {
    w.check()?;
    check_window(window, w)?;
    Ok(head(&unroll(window, w).0.h, w))
}

/// Predictions for every row of `batch`.
pub fn predict_batch(batch: &TrainingSet, w: &LstmWeights) -> Result<Vec<f64>> {
    w.check()?;
    check_window(batch.row(0), w)?;
    Ok((0..batch.len())
        .into_par_iter()
        .map(|k| head(&unroll(batch.row(k), w).0.h, w))
        .collect())
}

/// Adds `scale · ∂(prediction − target)²/∂θ` for one sample into `grad` and
/// returns the squared error.
fn backprop_sample(window: &[f64], target: f64, w: &LstmWeights, scale: f64, grad: &mut LstmWeights) -> f64 {
    let hs = w.hidden_size;
    let zs = w.concat_size();
    let (last, caches) = unroll(window, w);
    let residual = head(&last.h, w) - target;
    let dpred = 2.0 * residual * scale;

    grad.head_b += dpred;
    for k in 0..hs {
        grad.head_w[k] += dpred * last.h[k];
    }
    let mut dh: Vec<f64> = w.head_w.iter().map(|v| dpred * v).collect();
    let mut dc = vec![0.0; hs];
    let mut da = [vec![0.0; hs], vec![0.0; hs], vec![0.0; hs], vec![0.0; hs]];

    for cache in caches.iter().rev() {
        for k in 0..hs {
            let (f, i, g, o, tc) = (cache.f[k], cache.i[k], cache.g[k], cache.o[k], cache.tanh_c[k]);
            dc[k] += dh[k] * o * (1.0 - tc * tc);
            da[0][k] = dc[k] * cache.c_prev[k] * f * (1.0 - f);
            da[1][k] = dc[k] * g * i * (1.0 - i);
            da[2][k] = dc[k] * i * (1.0 - g * g);
            da[3][k] = dh[k] * tc * o * (1.0 - o);
            dc[k] *= f;
        }
        let mut dz = vec![0.0; zs];
        let gates = [
            (&w.w_f, &mut grad.w_f, &mut grad.b_f),
            (&w.w_i, &mut grad.w_i, &mut grad.b_i),
            (&w.w_c, &mut grad.w_c, &mut grad.b_c),
            (&w.w_o, &mut grad.w_o, &mut grad.b_o),
        ];
        for (gate, (wm, gw, gb)) in gates.into_iter().enumerate() {
            for r in 0..hs {
                let a = da[gate][r];
                gb[r] += a;
                let row = r * zs..(r + 1) * zs;
                for ((gv, wv), (zv, dzv)) in gw[row.clone()]
                    .iter_mut()
                    .zip(&wm[row])
                    .zip(cache.z.iter().zip(dz.iter_mut()))
                {
                    *gv += a * zv;
                    *dzv += a * wv;
                }
            }
        }
        dh.copy_from_slice(&dz[..hs]);
    }
    residual * residual
}

/// Gradient of the batch mean squared error, and that error.
///
/// Samples are split into fixed-size chunks that may run in parallel; the
/// chunk sums are added in chunk order, so the result is deterministic.
pub fn gradients(batch: &TrainingSet, w: &LstmWeights) -> Result<(LstmWeights, f64)> {
    w.check()?;
    check_window(batch.row(0), w)?;
    let n = batch.len();
    let scale = 1.0 / n as f64;
    let starts: Vec<usize> = (0..n).step_by(GRADIENT_CHUNK).collect();
    let partials: Vec<(LstmWeights, f64)> = starts
        .par_iter()
        .map(|&s| {
            let mut g = LstmWeights::zeros(w.input_size, w.hidden_size);
            let mut sse = 0.0;
            for k in s..(s + GRADIENT_CHUNK).min(n) {
                sse += backprop_sample(batch.row(k), batch.targets[k], w, scale, &mut g);
            }
            (g, sse)
        })
        .collect();
    let mut total = LstmWeights::zeros(w.input_size, w.hidden_size);
    let mut sse = 0.0;
    for (g, s) in &partials {
        total.add_assign(g);
        sse += s;
    }
    Ok((total, sse * scale))
}

/// Batch mean squared error.
pub fn batch_loss(batch: &TrainingSet, w: &LstmWeights) -> Result<f64> {
    let pred = predict_batch(batch, w)?;
    Ok(pred
        .iter()
        .zip(&batch.targets)
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / batch.len() as f64)
}

struct Adam {
    m: LstmWeights,
    v: LstmWeights,
    t: i32,
    lr: f64,
}

impl Adam {
    fn new(like: &LstmWeights, lr: f64) -> Self {
        Adam {
            m: LstmWeights::zeros(like.input_size, like.hidden_size),
            v: LstmWeights::zeros(like.input_size, like.hidden_size),
            t: 0,
            lr,
        }
    }

    fn step(&mut self, w: &mut LstmWeights, g: &LstmWeights) {
        self.t += 1;
        let c1 = 1.0 - ADAM_BETA1.powi(self.t);
        let c2 = 1.0 - ADAM_BETA2.powi(self.t);
        let tensors = w
            .tensors_mut()
            .into_iter()
            .zip(g.tensors())
            .zip(self.m.tensors_mut().into_iter().zip(self.v.tensors_mut()));
        for ((wt, gt), (mt, vt)) in tensors {
            for k in 0..wt.len() {
                mt[k] = ADAM_BETA1 * mt[k] + (1.0 - ADAM_BETA1) * gt[k];
                vt[k] = ADAM_BETA2 * vt[k] + (1.0 - ADAM_BETA2) * gt[k] * gt[k];
                let mh = mt[k] / c1;
                let vh = vt[k] / c2;
                wt[k] -= self.lr * mh / (vh.sqrt() + ADAM_EPSILON);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedLstm {
    pub weights: LstmWeights,
    /// Training MSE before each epoch's update.
    pub loss_history: Vec<f64>,
    /// Training MSE of the final weights.
    pub final_loss: f64,
    /// Validation MSE before each update and after the last one (empty
    /// without a validation set).
    pub validation_history: Vec<f64>,
    /// Number of updates applied to the returned weights.
    pub selected_epoch: usize,
}

/// Windows `series` and trains for `config.epochs` full-batch Adam steps.
pub fn train(series: &[f64], config: &LstmConfig) -> Result<TrainedLstm> {
    config.validate()?;
    if series.len() <= config.window + 1 {
        return Err(Error::invalid(format!(
            "LSTM training needs more than {} points, got {}",
            config.window + 1,
            series.len()
        )));
    }
    let batch = TrainingSet::lagged(series, config.window)?;
    fit(&batch, None, config)
}

/// Full-batch Adam on prepared windows. With a validation set the returned
/// weights are those with the lowest validation MSE seen, the initial
/// weights included; otherwise the final weights.
pub fn fit(batch: &TrainingSet, validation: Option<&TrainingSet>, config: &LstmConfig) -> Result<TrainedLstm> {
    config.validate()?;
    if batch.dim % config.input_size != 0 {
        return Err(Error::invalid("window width is not a multiple of input_size"));
    }
    let mut w = LstmWeights::init(config.input_size, config.hidden_size, config.seed);
    let mut adam = Adam::new(&w, config.learning_rate);
    let mut loss_history = Vec::with_capacity(config.epochs);
    let mut validation_history = Vec::new();
    let mut best: Option<(f64, usize, LstmWeights)> = None;

    let mut track = |w: &LstmWeights, epoch: usize, history: &mut Vec<f64>| -> Result<()> {
        if let Some(val) = validation {
            let loss = batch_loss(val, w)?;
            history.push(loss);
            if best.as_ref().map_or(true, |(b, _, _)| loss < *b) {
                best = Some((loss, epoch, w.clone()));
            }
        }
        Ok(())
    };

    for epoch in 0..config.epochs {
        track(&w, epoch, &mut validation_history)?;
        let (g, loss) = gradients(batch, &w)?;
        if !loss.is_finite() {
            return Err(Error::Degenerate(format!("LSTM loss diverged at epoch {epoch}")));
        }
        loss_history.push(loss);
        adam.step(&mut w, &g);
    }
    track(&w, config.epochs, &mut validation_history)?;
    let final_loss = batch_loss(batch, &w)?;

    let (weights, selected_epoch) = match best {
        Some((_, epoch, best_w)) => (best_w, epoch),
        None => (w, config.epochs),
    };
    Ok(TrainedLstm {
        weights,
        loss_history,
        final_loss,
        validation_history,
        selected_epoch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    /// Scalar-loop reference step written without the vector helpers.
    fn oracle_step(x: &[f64], h: &[f64], c: &[f64], w: &LstmWeights) -> (Vec<f64>, Vec<f64>) {
        let hs = w.hidden_size;
        let zs = w.concat_size();
        let mut h_new = vec![0.0; hs];
        let mut c_new = vec![0.0; hs];
        for k in 0..hs {
            let mut a = [w.b_f[k], w.b_i[k], w.b_c[k], w.b_o[k]];
            for j in 0..zs {
                let zj = if j < hs { h[j] } else { x[j - hs] };
                a[0] += w.w_f[k * zs + j] * zj;
                a[1] += w.w_i[k * zs + j] * zj;
                a[2] += w.w_c[k * zs + j] * zj;
                a[3] += w.w_o[k * zs + j] * zj;
            }
            c_new[k] = sig(a[0]) * c[k] + sig(a[1]) * a[2].tanh();
            h_new[k] = sig(a[3]) * c_new[k].tanh();
        }
        (h_new, c_new)
    }

    fn oracle_sequence(window: &[f64], w: &LstmWeights) -> f64 {
        let mut h = vec![0.0; w.hidden_size];
        let mut c = vec![0.0; w.hidden_size];
        for x in window.chunks(w.input_size) {
            let (h2, c2) = oracle_step(x, &h, &c, w);
            h = h2;
            c = c2;
        }
        let mut out = w.head_b;
        for k in 0..w.hidden_size {
            out += w.head_w[k] * h[k];
        }
        out
    }

    #[test]
    fn zero_weights_give_half_gates() {
        let w = LstmWeights::zeros(1, 3);
        let s = cell_forward(&[0.7], &CellState::zeros(3), &w).unwrap();
        assert_eq!(s.c, vec![0.0; 3]);
        assert_eq!(s.h, vec![0.0; 3]);
        let (_, cache) = step(&[0.7], &CellState::zeros(3), &w);
        assert!(cache.f.iter().chain(&cache.i).chain(&cache.o).all(|&g| g == 0.5));
    }

    #[test]
    fn saturated_forget_gate_carries_memory() {
        let mut w = LstmWeights::zeros(1, 2);
        w.b_f = vec![50.0; 2];
        let prev = CellState {
            h: vec![0.0; 2],
            c: vec![1.5, -0.25],
        };
        let s = cell_forward(&[0.3], &prev, &w).unwrap();
        assert!((s.c[0] - 1.5).abs() < 1e-12);
        assert!((s.c[1] + 0.25).abs() < 1e-12);
    }

    #[test]
    fn cell_matches_scalar_oracle() {
        let w = LstmWeights::init(2, 4, 11);
        let prev = CellState {
            h: vec![0.1, -0.2, 0.3, 0.05],
            c: vec![-0.4, 0.2, 0.9, -1.1],
        };
        let s = cell_forward(&[0.5, -1.5], &prev, &w).unwrap();
        let (h, c) = oracle_step(&[0.5, -1.5], &prev.h, &prev.c, &w);
        for k in 0..4 {
            assert!((s.h[k] - h[k]).abs() < 1e-12);
            assert!((s.c[k] - c[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn sequence_forward_cases() {
        let mut w = LstmWeights::zeros(1, 3);
        w.head_b = 0.8;
        assert_eq!(sequence_forward(&[1.0, 2.0, 3.0], &w).unwrap(), 0.8);

        let w = LstmWeights::init(1, 5, 3);
        let one = sequence_forward(&[0.4], &w).unwrap();
        let s = cell_forward(&[0.4], &CellState::zeros(5), &w).unwrap();
        assert_eq!(one, head(&s.h, &w));

        let window = [0.3, -0.1, 0.8, 1.2, -0.6];
        let got = sequence_forward(&window, &w).unwrap();
        assert!((got - oracle_sequence(&window, &w)).abs() < 1e-12);
    }

    #[test]
    fn gate_ranges_and_cell_identity() {
        let w = LstmWeights::init(1, 6, 5);
        let window = [2.0, -3.0, 0.5, 4.0, -1.0, 0.0, 7.0];
        let (_, caches) = unroll(&window, &w);
        let mut c_prev = vec![0.0; 6];
        for cache in &caches {
            assert!(cache.f.iter().chain(&cache.i).chain(&cache.o).all(|&g| g > 0.0 && g < 1.0));
            assert!(cache.g.iter().chain(&cache.tanh_c).all(|&g| g.abs() < 1.0));
            assert_eq!(cache.c_prev, c_prev);
            c_prev = (0..6).map(|k| cache.f[k] * cache.c_prev[k] + cache.i[k] * cache.g[k]).collect();
        }
    }

    #[test]
    fn shape_errors() {
        let w = LstmWeights::zeros(1, 3);
        assert!(cell_forward(&[0.0, 1.0], &CellState::zeros(3), &w).is_err());
        assert!(cell_forward(&[0.0], &CellState::zeros(2), &w).is_err());
        assert!(sequence_forward(&[], &w).is_err());
        let w2 = LstmWeights::zeros(2, 3);
        assert!(sequence_forward(&[1.0, 2.0, 3.0], &w2).is_err());
    }

    fn toy_batch(rows: usize, window: usize, seed: u64) -> TrainingSet {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inputs: Vec<f64> = (0..rows * window).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let targets: Vec<f64> = (0..rows).map(|_| rng.gen_range(-1.0..1.0)).collect();
        TrainingSet::new(inputs, window, targets).unwrap()
    }

    #[test]
    fn zero_residual_gives_zero_head_bias_gradient() {
        let w = LstmWeights::zeros(1, 3);
        let batch = TrainingSet::new(vec![0.5; 8], 4, vec![0.0, 0.0]).unwrap();
        let (g, loss) = gradients(&batch, &w).unwrap();
        assert_eq!(g.head_b, 0.0);
        assert_eq!(loss, 0.0);
    }

    #[test]
    fn duplicated_batch_has_same_gradient() {
        let w = LstmWeights::init(1, 4, 2);
        let one = TrainingSet::new(vec![0.1, 0.4, -0.3], 3, vec![0.9]).unwrap();
        let two = TrainingSet::new(vec![0.1, 0.4, -0.3, 0.1, 0.4, -0.3], 3, vec![0.9, 0.9]).unwrap();
        let (g1, _) = gradients(&one, &w).unwrap();
        let (g2, _) = gradients(&two, &w).unwrap();
        for (a, b) in g1.tensors().iter().zip(g2.tensors()) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() <= 1e-15 * x.abs().max(1.0));
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_central_differences() {
        let batch = toy_batch(40, 5, 8);
        for point in 0..3u64 {
            let w = LstmWeights::init(1, 6, 100 + point);
            let (g, _) = gradients(&batch, &w).unwrap();
            let worst = max_relative_gradient_error(&batch, &w, &g);
            assert!(worst < 1e-4, "point {point}: relative error {worst}");
        }
    }

    /// Central differences (ε = 1e-5) over every parameter.
    fn max_relative_gradient_error(batch: &TrainingSet, w: &LstmWeights, g: &LstmWeights) -> f64 {
        let eps = 1e-5;
        let mut worst = 0.0f64;
        let mut probe = w.clone();
        for t in 0..10 {
            for k in 0..w.tensors()[t].len() {
                let base = w.tensors()[t][k];
                probe.tensors_mut()[t][k] = base + eps;
                let up = batch_loss(batch, &probe).unwrap();
                probe.tensors_mut()[t][k] = base - eps;
                let down = batch_loss(batch, &probe).unwrap();
                probe.tensors_mut()[t][k] = base;
                let numeric = (up - down) / (2.0 * eps);
                let analytic = g.tensors()[t][k];
                let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((analytic - numeric).abs() / denom);
            }
        }
        worst
    }

    #[test]
    fn constant_series_is_learned() {
        let cfg = LstmConfig {
            hidden_size: 4,
            learning_rate: 1e-2,
            epochs: 500,
            seed: 1,
            ..LstmConfig::default()
        };
        let out = train(&vec![2.5; 60], &cfg).unwrap();
        assert!(out.final_loss < 1e-4, "final loss {}", out.final_loss);
        let p = sequence_forward(&[2.5; 5], &out.weights).unwrap();
        assert!((p - 2.5).abs() < 1e-2);
    }

    #[test]
    fn sine_loss_moving_average_decreases() {
        let series: Vec<f64> = (0..120).map(|t| (t as f64 * 0.3).sin()).collect();
        let cfg = LstmConfig {
            hidden_size: 6,
            learning_rate: 5e-3,
            epochs: 300,
            seed: 4,
            ..LstmConfig::default()
        };
        let out = train(&series, &cfg).unwrap();
        let avg: Vec<f64> = out.loss_history.windows(50).map(|w| w.iter().sum::<f64>() / 50.0).collect();
        assert!(avg.windows(2).all(|p| p[1] <= p[0]), "moving average rose");
        assert!(out.final_loss < out.loss_history[0]);
    }

    #[test]
    fn training_is_deterministic() {
        let series: Vec<f64> = (0..80).map(|t| (t as f64 * 0.2).cos()).collect();
        let cfg = LstmConfig {
            hidden_size: 5,
            learning_rate: 1e-2,
            epochs: 40,
            seed: 9,
            ..LstmConfig::default()
        };
        let a = train(&series, &cfg).unwrap();
        let b = train(&series, &cfg).unwrap();
        assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
        assert_eq!(a.weights, b.weights);
    }

    #[test]
    fn validation_selection_keeps_best_epoch() {
        let batch = toy_batch(30, 5, 1);
        let val = toy_batch(10, 5, 2);
        let cfg = LstmConfig {
            hidden_size: 4,
            learning_rate: 1e-2,
            epochs: 30,
            seed: 3,
            ..LstmConfig::default()
        };
        let out = fit(&batch, Some(&val), &cfg).unwrap();
        assert_eq!(out.validation_history.len(), 31);
        let best = out.validation_history.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(out.validation_history[out.selected_epoch], best);
        assert_eq!(batch_loss(&val, &out.weights).unwrap(), best);
    }

    #[test]
    fn short_series_rejected() {
        assert!(train(&[1.0; 6], &LstmConfig::default()).is_err());
        let cfg = LstmConfig {
            epochs: 0,
            ..LstmConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
