//! End-to-end forecasting: clean, decompose, tune one LSSVM per mode, model
//! the decomposition residual with an LSTM, align and sum the one-step
//! forecasts, and score them.
//!
//! The series is split chronologically into train, validation and test
//! segments. Every statistic used for imputation or scaling comes from the
//! training segment. Lag windows never straddle a segment boundary, so a
//! component with window `m` yields `len(test) − m` test forecasts.

mod config;
pub mod data;
mod report;
pub mod synthetic;

use std::collections::BTreeMap;
use std::ops::Range;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ebqpso::{self, EbqpsoConfig};
use crate::error::{Error, Result};
use crate::lssvm::{self, LssvmHyper, LssvmModel, TrainingSet};
use crate::lstm::{self, LstmConfig, LstmWeights};
use crate::metrics::MetricSet;
use crate::svmd::{self, Series, SvmdResult};
pub use config::{PipelineConfig, SearchBounds, Variant};
pub use data::{impute, load_series, CleanedSeries, RawSeries};
pub use report::write_report;

/// Lag-window regression set: row `k` holds `series[k..k+m]`, target `k` is
/// `series[k+m]`.
pub type WindowedSet = TrainingSet;

pub fn make_windows(series: &[f64], m: usize) -> Result<WindowedSet> {
    TrainingSet::lagged(series, m)
}

/// Chronological split fractions; the test segment takes the remainder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_frac: 0.70,
            val_frac: 0.15,
        }
    }
}

impl SplitSpec {
    pub fn test_frac(&self) -> f64 {
        1.0 - self.train_frac - self.val_frac
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |f: f64| f > 0.0 && f < 1.0;
        if !(ok(self.train_frac) && ok(self.val_frac) && self.test_frac() > 1e-12) {
            return Err(Error::invalid(
                "split fractions must be positive and leave a test segment",
            ));
        }
        Ok(())
    }

    /// Segment boundaries for `n` points: `floor(train·n)` training points,
    /// `floor(val·n)` validation points, the rest for testing.
    pub fn segments(&self, n: usize) -> Result<Segments> {
        self.validate()?;
        // The small offset keeps e.g. 0.70 · 1440 from flooring to 1007.
        let count = |f: f64| (f * n as f64 + 1e-9).floor() as usize;
        let train_end = count(self.train_frac);
        let val_end = train_end + count(self.val_frac);
        let seg = Segments {
            train_end,
            val_end,
            len: n,
        };
        if train_end == 0 || val_end == train_end || val_end >= n {
            return Err(Error::invalid(format!(
                "{n} points cannot be split into three non-empty segments"
            )));
        }
        Ok(seg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segments {
    pub train_end: usize,
    pub val_end: usize,
    pub len: usize,
}

impl Segments {
    pub fn train(&self) -> Range<usize> {
        0..self.train_end
    }

    pub fn validation(&self) -> Range<usize> {
        self.train_end..self.val_end
    }

    pub fn test(&self) -> Range<usize> {
        self.val_end..self.len
    }

    /// Length of the shortest segment.
    pub fn shortest(&self) -> usize {
        self.train_end
            .min(self.val_end - self.train_end)
            .min(self.len - self.val_end)
    }
}

/// Affine standardization fitted on one segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    /// A constant segment keeps unit scale.
    pub fn fit(values: &[f64]) -> Self {
        let (mean, std) = data::mean_std(values);
        let std = if std > 1e-12 * mean.abs().max(1.0) { std } else { 1.0 };
        Scaler { mean, std }
    }

    pub fn apply(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| (v - self.mean) / self.std).collect()
    }

    pub fn invert(&self, values: &[f64]) -> Vec<f64> {
        values.iter().map(|v| v * self.std + self.mean).collect()
    }
}

/// Tuned hyperparameters for one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModePlan {
    pub mode_index: usize,
    pub gamma_opt: f64,
    pub sigma2_opt: f64,
    pub window_opt: usize,
    /// Validation MSE in the component's own units.
    pub validation_mse: f64,
    pub evaluations: usize,
}

fn decode(x: &[f64]) -> (f64, f64, usize) {
    (x[0], x[1], x[2].round() as usize)
}

/// Validation MSE of an LSSVM trained on `train` windows and scored on
/// `validation` windows of an already scaled series.
fn validation_mse(train: &[f64], validation: &[f64], gamma: f64, sigma2: f64, m: usize) -> Result<f64> {
    let fit_set = make_windows(train, m)?;
    let val_set = make_windows(validation, m)?;
    let model = lssvm::train(&fit_set, LssvmHyper::new(gamma, sigma2)?)?;
    let pred = model.predict_rows(&val_set.inputs)?;
    Ok(pred
        .iter()
        .zip(&val_set.targets)
        .map(|(p, y)| (p - y).powi(2))
        .sum::<f64>()
        / pred.len() as f64)
}

fn check_segments_fit(seg: &Segments, window_max: usize) -> Result<()> {
    if seg.shortest() <= window_max {
        return Err(Error::invalid(format!(
            "segments of {} / {} / {} points are too short for windows up to {window_max}",
            seg.train_end,
            seg.val_end - seg.train_end,
            seg.len - seg.val_end
        )));
    }
    Ok(())
}

/// Searches `(γ, σ², m)` for one component by minimizing validation MSE.
///
/// The component is standardized with training statistics. Candidates whose
/// LSSVM cannot be trained score `+∞` and the search carries on.
pub fn optimize_mode(
    mode: &[f64],
    mode_index: usize,
    split: &SplitSpec,
    opt: &EbqpsoConfig,
    bounds: &SearchBounds,
) -> Result<ModePlan> {
    let seg = split.segments(mode.len())?;
    check_segments_fit(&seg, bounds.window.1)?;
    let scaler = Scaler::fit(&mode[seg.train()]);
    let scaled = scaler.apply(mode);
    let (train, validation) = (&scaled[seg.train()], &scaled[seg.validation()]);
    let space = bounds.space()?;

    let fitness = |x: &[f64]| {
        let (gamma, sigma2, m) = decode(x);
        validation_mse(train, validation, gamma, sigma2, m).unwrap_or(f64::INFINITY)
    };
    let trace = ebqpso::run(fitness, &space, opt)?;
    if !trace.best_fitness.is_finite() {
        return Err(Error::Degenerate(format!(
            "component {mode_index}: no candidate LSSVM could be trained"
        )));
    }
    let (gamma, sigma2, m) = decode(&trace.best_position);
    Ok(ModePlan {
        mode_index,
        gamma_opt: gamma,
        sigma2_opt: sigma2,
        window_opt: m,
        validation_mse: trace.best_fitness * scaler.std * scaler.std,
        evaluations: trace.evaluation_count,
    })
}

/// LSSVM refitted on train + validation with a tuned plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeForecaster {
    pub plan: ModePlan,
    pub scaler: Scaler,
    pub model: LssvmModel,
}

impl ModeForecaster {
    pub fn fit(mode: &[f64], seg: &Segments, plan: ModePlan) -> Result<Self> {
        let scaler = Scaler::fit(&mode[seg.train()]);
        let scaled = scaler.apply(&mode[..seg.val_end]);
        let set = make_windows(&scaled, plan.window_opt)?;
        let model = lssvm::train(&set, LssvmHyper::new(plan.gamma_opt, plan.sigma2_opt)?)?;
        Ok(ModeForecaster {
            plan,
            scaler,
            model,
        })
    }

    /// One-step forecasts for targets `range.start + m .. range.end`.
    pub fn predict(&self, mode: &[f64], range: Range<usize>) -> Result<Vec<f64>> {
        let scaled = self.scaler.apply(&mode[range]);
        let set = make_windows(&scaled, self.plan.window_opt)?;
        Ok(self.scaler.invert(&self.model.predict_rows(&set.inputs)?))
    }
}

/// `original − Σ modes`.
pub fn error_sequence(original: &[f64], result: &SvmdResult) -> Result<Vec<f64>> {
    if original.len() != result.source_length {
        return Err(Error::invalid(format!(
            "series of length {} does not match a decomposition of length {}",
            original.len(),
            result.source_length
        )));
    }
    let sum = result.mode_sum();
    Ok(original.iter().zip(&sum).map(|(x, s)| x - s).collect())
}

/// Drops the first `m_max − m_i` forecasts of each component so all start at
/// the same target, then sums them. The result has the length of the
/// shortest trimmed component.
pub fn align_and_aggregate(components: &[(usize, Vec<f64>)], m_max: usize) -> Result<Vec<f64>> {
    if components.is_empty() {
        return Err(Error::invalid("nothing to aggregate"));
    }
    let mut trimmed = Vec::with_capacity(components.len());
    for (k, (m, pred)) in components.iter().enumerate() {
        let Some(d) = m_max.checked_sub(*m) else {
            return Err(Error::invalid(format!("component {k}: window {m} exceeds m_max {m_max}")));
        };
        if pred.len() < d {
            return Err(Error::invalid(format!(
                "component {k}: {} forecasts cannot lose {d} leading values",
                pred.len()
            )));
        }
        trimmed.push(&pred[d..]);
    }
    let len = trimmed.iter().map(|t| t.len()).min().unwrap_or(0);
    Ok((0..len).map(|i| trimmed.iter().map(|t| t[i]).sum()).collect())
}

/// LSTM model of the decomposition residual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualModel {
    pub scaler: Scaler,
    pub weights: LstmWeights,
    pub window: usize,
    pub loss_history: Vec<f64>,
    pub selected_epoch: usize,
}

impl ResidualModel {
    /// Trains on the training windows and keeps the weights with the lowest
    /// validation loss.
    pub fn fit(residual: &[f64], seg: &Segments, config: &LstmConfig) -> Result<Self> {
        check_segments_fit(seg, config.window)?;
        let scaler = Scaler::fit(&residual[seg.train()]);
        let scaled = scaler.apply(residual);
        let train = make_windows(&scaled[seg.train()], config.window)?;
        let val = make_windows(&scaled[seg.validation()], config.window)?;
        let out = lstm::fit(&train, Some(&val), config)?;
        Ok(ResidualModel {
            scaler,
            weights: out.weights,
            window: config.window,
            loss_history: out.loss_history,
            selected_epoch: out.selected_epoch,
        })
    }

    pub fn predict(&self, residual: &[f64], range: Range<usize>) -> Result<Vec<f64>> {
        let scaled = self.scaler.apply(&residual[range]);
        let set = make_windows(&scaled, self.window)?;
        Ok(self.scaler.invert(&lstm::predict_batch(&set, &self.weights)?))
    }
}

/// Provenance written next to every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub crate_version: String,
    pub variant: Variant,
    pub seed: u64,
    pub config_digest: String,
    pub config: String,
    pub input: PathBuf,
    pub rows: usize,
    pub segments: Segments,
    pub imputed_missing: usize,
    pub imputed_outliers: usize,
    pub fill_value: f64,
    /// The decomposition sees the whole series, test segment included.
    pub decomposition_sees_test_segment: bool,
    /// LSSVMs are refitted on train + validation before testing.
    pub final_fit: String,
    pub center_frequencies: Vec<f64>,
    pub plans: Vec<ModePlan>,
    pub lstm_selected_epoch: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentForecast {
    pub window: usize,
    pub predictions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastReport {
    pub variant: Variant,
    /// Series index of the first aligned target.
    pub first_index: usize,
    pub actual: Vec<f64>,
    pub predicted: Vec<f64>,
    pub components: Vec<ComponentForecast>,
    pub error_prediction: Option<ComponentForecast>,
    pub metrics: MetricSet,
    pub manifest: Manifest,
    /// Decomposed modes over the whole series (empty without SVMD).
    pub modes: Vec<Vec<f64>>,
    pub loss_trace: Option<Vec<f64>>,
}

/// Tuned and refitted forecaster for one component, with its test forecasts.
struct Component {
    forecaster: ModeForecaster,
    forecast: ComponentForecast,
}

fn forecast_components(
    series: &[Vec<f64>],
    seg: &Segments,
    config: &PipelineConfig,
) -> Result<Vec<Component>> {
    series
        .par_iter()
        .enumerate()
        .map(|(k, values)| {
            let opt = EbqpsoConfig {
                seed: config.seed ^ k as u64,
                ..config.ebqpso.clone()
            };
            let plan = optimize_mode(values, k, &config.split, &opt, &config.bounds)?;
            let forecaster = ModeForecaster::fit(values, seg, plan)?;
            let predictions = forecaster.predict(values, seg.test())?;
            Ok(Component {
                forecast: ComponentForecast {
                    window: forecaster.plan.window_opt,
                    predictions,
                },
                forecaster,
            })
        })
        .collect()
}

struct Shared {
    cleaned: CleanedSeries,
    seg: Segments,
    decomposition: Option<SvmdResult>,
}

/// Runs the pipeline for several variants, computing shared stages once.
pub fn run_variants(config: &PipelineConfig, variants: &[Variant]) -> Result<Vec<ForecastReport>> {
    config.validate()?;
    if config.input.as_os_str().is_empty() {
        return Err(Error::Config("io.input is not set".into()));
    }
    let raw = load_series(&config.input, &config.column).map_err(|e| e.in_stage("load"))?;
    run_variants_on(&raw, config, variants)
}

/// As [`run_variants`], on a series already in memory.
pub fn run_variants_on(raw: &RawSeries, config: &PipelineConfig, variants: &[Variant]) -> Result<Vec<ForecastReport>> {
    config.validate()?;
    let seg = config.split.segments(raw.len()).map_err(|e| e.in_stage("split"))?;
    let cleaned = impute(raw, seg.train_end, config.outlier_std).map_err(|e| e.in_stage("impute"))?;
    let x = cleaned.values.clone();

    let decomposition = if variants.iter().any(|v| v.uses_svmd()) {
        Some(svmd::decompose(&Series::new(x.clone()), &config.svmd).map_err(|e| e.in_stage("decompose"))?)
    } else {
        None
    };
    let shared = Shared {
        cleaned,
        seg,
        decomposition,
    };

    let mut raw_component = None;
    let mut mode_components = None;
    let mut residual_model = None;
    let mut reports = Vec::with_capacity(variants.len());
    for &variant in variants {
        let report = match variant {
            Variant::LssvmEbqpso => {
                if raw_component.is_none() {
                    raw_component = Some(
                        forecast_components(std::slice::from_ref(&x), &seg, config)
                            .map_err(|e| e.in_stage("lssvm"))?,
                    );
                }
                build_report(variant, &shared, config, raw_component.as_ref().unwrap(), None)?
            }
            Variant::SvmdLssvm | Variant::SvmdLssvmLstm => {
                let dec = shared.decomposition.as_ref().expect("decomposed above");
                if mode_components.is_none() {
                    let modes: Vec<Vec<f64>> = dec.modes.iter().map(|m| m.values.clone()).collect();
                    mode_components =
                        Some(forecast_components(&modes, &seg, config).map_err(|e| e.in_stage("lssvm"))?);
                }
                let residual = if variant.uses_lstm() {
                    if residual_model.is_none() {
                        let e = error_sequence(&x, dec)?;
                        let lstm_cfg = LstmConfig {
                            seed: config.seed,
                            ..config.lstm.clone()
                        };
                        let model = ResidualModel::fit(&e, &seg, &lstm_cfg).map_err(|e| e.in_stage("lstm"))?;
                        let pred = model.predict(&e, seg.test()).map_err(|e| e.in_stage("lstm"))?;
                        residual_model = Some((model, pred));
                    }
                    residual_model.as_ref()
                } else {
                    None
                };
                build_report(variant, &shared, config, mode_components.as_ref().unwrap(), residual)?
            }
        };
        reports.push(report);
    }
    Ok(reports)
}

fn build_report(
    variant: Variant,
    shared: &Shared,
    config: &PipelineConfig,
    components: &[Component],
    residual: Option<&(ResidualModel, Vec<f64>)>,
) -> Result<ForecastReport> {
    let seg = shared.seg;
    let mut parts: Vec<(usize, Vec<f64>)> = components
        .iter()
        .map(|c| (c.forecast.window, c.forecast.predictions.clone()))
        .collect();
    if let Some((model, pred)) = residual {
        parts.push((model.window, pred.clone()));
    }
    let m_max = parts.iter().map(|(m, _)| *m).max().unwrap_or(0);
    let predicted = align_and_aggregate(&parts, m_max).map_err(|e| e.in_stage("aggregate"))?;
    let first_index = seg.val_end + m_max;
    let actual = shared.cleaned.values[first_index..first_index + predicted.len()].to_vec();
    let metrics = MetricSet::compute(&actual, &predicted).map_err(|e| e.in_stage("metrics"))?;

    let modes: Vec<Vec<f64>> = match (&shared.decomposition, variant.uses_svmd()) {
        (Some(dec), true) => dec.modes.iter().map(|m| m.values.clone()).collect(),
        _ => Vec::new(),
    };
    let center_frequencies = match (&shared.decomposition, variant.uses_svmd()) {
        (Some(dec), true) => dec.center_frequencies(),
        _ => Vec::new(),
    };
    let run_config = PipelineConfig {
        variant,
        ..config.clone()
    };
    let manifest = Manifest {
        crate_version: env!("CARGO_PKG_VERSION").to_string(),
        variant,
        seed: config.seed,
        config_digest: run_config.digest(),
        config: run_config.to_text(),
        input: config.input.clone(),
        rows: seg.len,
        segments: seg,
        imputed_missing: shared.cleaned.missing.len(),
        imputed_outliers: shared.cleaned.outliers.len(),
        fill_value: shared.cleaned.fill_value,
        decomposition_sees_test_segment: variant.uses_svmd(),
        final_fit: "train+validation".into(),
        center_frequencies,
        plans: components.iter().map(|c| c.forecaster.plan.clone()).collect(),
        lstm_selected_epoch: residual.map(|(m, _)| m.selected_epoch),
    };
    Ok(ForecastReport {
        variant,
        first_index,
        actual,
        predicted,
        components: components.iter().map(|c| c.forecast.clone()).collect(),
        error_prediction: residual.map(|(m, p)| ComponentForecast {
            window: m.window,
            predictions: p.clone(),
        }),
        metrics,
        manifest,
        modes,
        loss_trace: residual.filter(|_| config.trace).map(|(m, _)| m.loss_history.clone()),
    })
}

/// Runs the configured variant.
pub fn run_pipeline(config: &PipelineConfig) -> Result<ForecastReport> {
    run_ablation(config, config.variant)
}

/// Runs one named variant.
pub fn run_ablation(config: &PipelineConfig, variant: Variant) -> Result<ForecastReport> {
    Ok(run_variants(config, &[variant])?.remove(0))
}

/// Per-variant RMSE, keyed by variant name.
pub fn rmse_by_variant(reports: &[ForecastReport]) -> BTreeMap<String, f64> {
    reports
        .iter()
        .map(|r| (r.variant.to_string(), r.metrics.rmse))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::svmd::Mode;

    #[test]
    fn windows_follow_the_lag_matrix() {
        let w = make_windows(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert_eq!(w.inputs, vec![1.0, 2.0, 2.0, 3.0, 3.0, 4.0]);
        assert_eq!(w.targets, vec![3.0, 4.0, 5.0]);
        let one = make_windows(&[1.0, 2.0, 3.0], 2).unwrap();
        assert_eq!(one.len(), 1);
        assert!(make_windows(&[1.0, 2.0], 2).is_err());
        let s: Vec<f64> = (0..12).map(|v| v as f64 * 0.5).collect();
        let w = make_windows(&s, 4).unwrap();
        let first: Vec<f64> = (0..w.len()).map(|k| w.row(k)[0]).collect();
        assert_eq!(first, s[..12 - 4]);
    }

    #[test]
    fn split_is_chronological() {
        let seg = SplitSpec::default().segments(1440).unwrap();
        assert_eq!(seg.train(), 0..1008);
        assert_eq!(seg.validation(), 1008..1224);
        assert_eq!(seg.test(), 1224..1440);
        assert!(SplitSpec::default().segments(3).is_err());
        let bad = SplitSpec {
            train_frac: 0.8,
            val_frac: 0.2,
        };
        assert!(bad.segments(100).is_err());
    }

    fn result_with(modes: Vec<Vec<f64>>, n: usize) -> SvmdResult {
        SvmdResult {
            modes: modes
                .into_iter()
                .map(|values| Mode {
                    values,
                    center_frequency: 0.0,
                    converged: true,
                    iterations: 1,
                })
                .collect(),
            residual: vec![0.0; n],
            source_length: n,
        }
    }

    #[test]
    fn error_sequence_cases() {
        let x = vec![2.0, 4.0, 6.0];
        let exact = result_with(vec![vec![1.0, 1.0, 1.0], vec![1.0, 3.0, 5.0]], 3);
        assert_eq!(error_sequence(&x, &exact).unwrap(), vec![0.0; 3]);
        let half = result_with(vec![vec![1.0, 2.0, 3.0]], 3);
        assert_eq!(error_sequence(&x, &half).unwrap(), vec![1.0, 2.0, 3.0]);
        assert!(error_sequence(&x[..2], &half).is_err());
    }

    #[test]
    fn aggregation_trims_leading_values() {
        let a: Vec<f64> = (0..13).map(|v| v as f64).collect();
        let b = vec![100.0; 10];
        let out = align_and_aggregate(&[(2, a), (5, b)], 5).unwrap();
        assert_eq!(out.len(), 10);
        assert_eq!(out[0], 103.0);
        assert_eq!(out[9], 112.0);

        let same = align_and_aggregate(&[(3, vec![1.0, 2.0]), (3, vec![10.0, 20.0])], 3).unwrap();
        assert_eq!(same, vec![11.0, 22.0]);
        let single = align_and_aggregate(&[(4, vec![1.5, 2.5])], 4).unwrap();
        assert_eq!(single, vec![1.5, 2.5]);

        assert!(align_and_aggregate(&[(2, vec![1.0])], 5).is_err());
        assert!(align_and_aggregate(&[(6, vec![1.0])], 5).is_err());
        assert!(align_and_aggregate(&[], 1).is_err());
    }

    #[test]
    fn scaler_round_trip() {
        let s = Scaler::fit(&[1.0, 3.0]);
        assert_eq!((s.mean, s.std), (2.0, 1.0));
        assert_eq!(s.invert(&s.apply(&[5.0, -1.0])), vec![5.0, -1.0]);
        assert_eq!(Scaler::fit(&[4.0, 4.0]).std, 1.0);
    }

    fn small_opt(seed: u64) -> EbqpsoConfig {
        EbqpsoConfig {
            population: 8,
            generations: 6,
            lambda: 3,
            seed,
            ..EbqpsoConfig::default()
        }
    }

    #[test]
    fn collapsed_box_returns_its_point() {
        let mode: Vec<f64> = (0..200).map(|t| (t as f64 * 0.3).sin()).collect();
        let bounds = SearchBounds {
            gamma: (10.0, 10.0),
            sigma2: (2.0, 2.0),
            window: (4, 4),
        };
        let plan = optimize_mode(&mode, 0, &SplitSpec::default(), &small_opt(1), &bounds).unwrap();
        assert!((plan.gamma_opt - 10.0).abs() < 1e-12);
        assert!((plan.sigma2_opt - 2.0).abs() < 1e-12);
        assert_eq!(plan.window_opt, 4);
    }

    #[test]
    fn linear_mode_is_predictable() {
        let n = 400;
        let mode: Vec<f64> = (0..n).map(|t| t as f64 / n as f64).collect();
        let plan = optimize_mode(&mode, 0, &SplitSpec::default(), &small_opt(2), &SearchBounds::default()).unwrap();
        assert!(plan.validation_mse < 1e-6, "validation MSE {}", plan.validation_mse);
    }

    #[test]
    fn optimize_mode_is_deterministic() {
        let mode: Vec<f64> = (0..240).map(|t| (t as f64 * 0.25).sin()).collect();
        let a = optimize_mode(&mode, 3, &SplitSpec::default(), &small_opt(5), &SearchBounds::default()).unwrap();
        let b = optimize_mode(&mode, 3, &SplitSpec::default(), &small_opt(5), &SearchBounds::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn short_mode_rejected() {
        let mode = vec![1.0; 60];
        assert!(optimize_mode(&mode, 0, &SplitSpec::default(), &small_opt(0), &SearchBounds::default()).is_err());
    }
}
