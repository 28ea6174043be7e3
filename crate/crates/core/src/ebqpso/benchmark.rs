//! Sphere, Ackley, Griewank and McCormick test functions and a small
//! multi-trial comparison harness.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::pso::{run_pso, PsoCoefficients};
use super::{run, run_qpso, EbqpsoConfig, OptimizationTrace, SearchSpace};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BenchFunction {
    Sphere,
    Ackley,
    Griewank,
    McCormick,
}

impl BenchFunction {
    pub const ALL: [BenchFunction; 4] = [
        BenchFunction::Sphere,
        BenchFunction::Ackley,
        BenchFunction::Griewank,
        BenchFunction::McCormick,
    ];

    /// Known global minimum value.
    pub fn global_minimum(self) -> f64 {
        match self {
            BenchFunction::McCormick => -1.9133,
            _ => 0.0,
        }
    }

    /// Conventional search box for the function.
    pub fn search_space(self, dim: usize) -> Result<SearchSpace> {
        match self {
            BenchFunction::Sphere => SearchSpace::uniform(-100.0, 100.0, dim),
            BenchFunction::Ackley => SearchSpace::uniform(-32.768, 32.768, dim),
            BenchFunction::Griewank => SearchSpace::uniform(-600.0, 600.0, dim),
            BenchFunction::McCormick => {
                if dim != 2 {
                    return Err(Error::invalid("McCormick is defined for d = 2 only"));
                }
                SearchSpace::new(
                    vec![-1.5, -3.0],
                    vec![4.0, 4.0],
                    vec![false; 2],
                    vec![false; 2],
                )
            }
        }
    }

    pub fn eval(self, x: &[f64]) -> Result<f64> {
        match self {
            BenchFunction::McCormick if x.len() != 2 => {
                Err(Error::invalid("McCormick is defined for d = 2 only"))
            }
            _ if x.is_empty() => Err(Error::invalid("benchmark point is empty")),
            BenchFunction::Sphere => Ok(sphere(x)),
            BenchFunction::Ackley => Ok(ackley(x)),
            BenchFunction::Griewank => Ok(griewank(x)),
            BenchFunction::McCormick => Ok(mccormick(x)),
        }
    }
}

impl fmt::Display for BenchFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BenchFunction::Sphere => "sphere",
            BenchFunction::Ackley => "ackley",
            BenchFunction::Griewank => "griewank",
            BenchFunction::McCormick => "mccormick",
        };
        f.write_str(name)
    }
}

impl FromStr for BenchFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sphere" => Ok(BenchFunction::Sphere),
            "ackley" => Ok(BenchFunction::Ackley),
            "griewank" => Ok(BenchFunction::Griewank),
            "mccormick" => Ok(BenchFunction::McCormick),
            other => Err(Error::invalid(format!("unknown benchmark function `{other}`"))),
        }
    }
}

/// Evaluates a named benchmark at `x`.
pub fn benchmark(name: BenchFunction, x: &[f64]) -> Result<f64> {
    name.eval(x)
}

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn ackley(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / d;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / d;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    sum - prod + 1.0
}

pub fn mccormick(x: &[f64]) -> f64 {
    let (a, b) = (x[0], x[1]);
    (a + b).sin() + (a - b).powi(2) - 1.5 * a + 2.5 * b + 1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Pso,
    Qpso,
    Ebqpso,
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "pso" => Ok(Algorithm::Pso),
            "qpso" => Ok(Algorithm::Qpso),
            "ebqpso" => Ok(Algorithm::Ebqpso),
            other => Err(Error::invalid(format!("unknown algorithm `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub function: BenchFunction,
    pub algorithm: Algorithm,
    pub dim: usize,
    pub mean: f64,
    /// Sample standard deviation over trials.
    pub std: f64,
    pub per_trial_best: Vec<f64>,
    /// Fitness evaluations used by each trial.
    pub evaluations: Vec<usize>,
}

/// Breeding settings for the benchmark suite: M = 25, T = 100, breeding
/// every generation with four two-gene transposons per firing chromosome.
/// The LSSVM defaults target a three-gene chromosome and breed too rarely
/// for 20-dimensional functions.
pub fn benchmark_config(seed: u64) -> EbqpsoConfig {
    EbqpsoConfig {
        population: 25,
        generations: 100,
        jumping_rate: 1.0,
        transposon_count: 4,
        transposon_size: 2,
        lambda: 1,
        seed,
        ..EbqpsoConfig::default()
    }
}

/// Runs `trials` independent optimizations; trial `k` uses `seed + k`.
pub fn bench_opt(
    function: BenchFunction,
    dim: usize,
    algorithm: Algorithm,
    base: &EbqpsoConfig,
    trials: usize,
) -> Result<BenchReport> {
    if trials == 0 {
        return Err(Error::invalid("at least one trial is required"));
    }
    let space = function.search_space(dim)?;
    let f = move |x: &[f64]| function.eval(x).unwrap_or(f64::INFINITY);
    let mut best = Vec::with_capacity(trials);
    let mut evaluations = Vec::with_capacity(trials);
    for k in 0..trials {
        let cfg = EbqpsoConfig {
            seed: base.seed.wrapping_add(k as u64),
            ..base.clone()
        };
        let trace: OptimizationTrace = match algorithm {
            Algorithm::Ebqpso => run(f, &space, &cfg)?,
            Algorithm::Qpso => run_qpso(f, &space, &cfg)?,
            Algorithm::Pso => run_pso(f, &space, &cfg, PsoCoefficients::default())?,
        };
        best.push(trace.best_fitness);
        evaluations.push(trace.evaluation_count);
    }
    let mean = best.iter().sum::<f64>() / trials as f64;
    let std = if trials > 1 {
        (best.iter().map(|b| (b - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(BenchReport {
        function,
        algorithm,
        dim,
        mean,
        std,
        per_trial_best: best,
        evaluations,
    })
}
