//! Quantum-behaved particle swarm optimization with elitist breeding.
//!
//! Particles live in the unit cube; a [`SearchSpace`] decodes them before the
//! fitness function sees them. Every `lambda` generations the personal bests
//! and the global best form an elite pool that is recombined by the
//! transposon operator; bred chromosomes replace personal bests they beat.
//!
//! The whole run consumes a single ChaCha8 stream in a fixed order: initial
//! positions (particle-major), then per generation the breeding draws (when
//! breeding fires) followed by `φ, u, sign` for each particle and dimension.
//! Fitness calls may run in parallel; their results are collected by index,
//! so the trace does not depend on scheduling.

pub mod benchmark;
pub mod pso;
mod space;
pub mod transposon;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use space::{Normalized, SearchSpace};
pub use transposon::transposon_operator;

/// Contraction-expansion schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeMode {
    Fixed(f64),
    /// `0.5 + 0.5 (T − t) / T`
    LinearDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbqpsoConfig {
    pub population: usize,
    pub generations: usize,
    pub jumping_rate: f64,
    pub transposon_count: usize,
    pub transposon_size: usize,
    /// Breed every `lambda` generations.
    pub lambda: usize,
    pub ce_mode: CeMode,
    pub seed: u64,
}

impl Default for EbqpsoConfig {
    fn default() -> Self {
        EbqpsoConfig {
            population: 25,
            generations: 100,
            jumping_rate: 0.3,
            transposon_count: 1,
            transposon_size: 1,
            lambda: 5,
            ce_mode: CeMode::Fixed(0.5),
            seed: 0,
        }
    }
}

impl EbqpsoConfig {
    pub fn validate(&self, dim: usize) -> Result<()> {
        if self.population == 0 || self.generations == 0 {
            return Err(Error::invalid("population and generations must be positive"));
        }
        if !(0.0..=1.0).contains(&self.jumping_rate) {
            return Err(Error::invalid("jumping_rate must lie in [0, 1]"));
        }
        if self.transposon_count == 0 || self.transposon_size == 0 {
            return Err(Error::invalid("transposon count and size must be positive"));
        }
        if self.transposon_size > dim {
            return Err(Error::invalid(format!(
                "transposon_size {} exceeds dimension {dim}",
                self.transposon_size
            )));
        }
        if self.lambda == 0 || self.lambda > self.generations {
            return Err(Error::invalid("lambda must lie in [1, generations]"));
        }
        if let CeMode::Fixed(a) = self.ce_mode {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::invalid("fixed CE coefficient must be positive"));
            }
        }
        Ok(())
    }

    /// Upper bound on fitness calls: `T·M·(2+λ)/λ + M`.
    pub fn evaluation_budget(&self) -> usize {
        let (t, m, l) = (self.generations, self.population, self.lambda);
        t * m * (2 + l) / l + m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationTrace {
    /// Decoded coordinates of the best point found.
    pub best_position: Vec<f64>,
    pub best_fitness: f64,
    /// Best-ever fitness after each generation.
    pub fitness_history: Vec<f64>,
    pub evaluation_count: usize,
}

/// Per-dimension mean of the personal best positions.
pub fn mean_best(pbest: &[Vec<f64>]) -> Result<Vec<f64>> {
    let Some(first) = pbest.first() else {
        return Err(Error::invalid("mean_best of an empty swarm"));
    };
    let d = first.len();
    if pbest.iter().any(|p| p.len() != d) {
        return Err(Error::invalid("personal bests differ in dimension"));
    }
    let mut mean = vec![0.0; d];
    for p in pbest {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v;
        }
    }
    let m = pbest.len() as f64;
    mean.iter_mut().for_each(|v| *v /= m);
    Ok(mean)
}

/// CE coefficient for generation `t` of `total`.
pub fn contraction_expansion(t: usize, total: usize, mode: CeMode) -> f64 {
    match mode {
        CeMode::Fixed(a) => a,
        CeMode::LinearDecay => {
            let total = total.max(1) as f64;
            0.5 + 0.5 * (total - t as f64) / total
        }
    }
}

/// Uniform draw from the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.gen();
        if u > 0.0 {
            return u;
        }
    }
}

/// One QPSO position update for every particle, clamped to the unit cube.
///
/// Each coordinate becomes `P ± α·|mbest_j − X_ij|·ln(1/u)` with
/// `P = φ·pbest_ij + (1 − φ)·gbest_j`.
pub fn qpso_step<R: Rng + ?Sized>(
    positions: &mut [Vec<f64>],
    pbest: &[Vec<f64>],
    gbest: &[f64],
    mbest: &[f64],
    alpha: f64,
    rng: &mut R,
) {
    for (x, p) in positions.iter_mut().zip(pbest) {
        for j in 0..x.len() {
            let phi: f64 = rng.gen();
            let u = open_unit(rng);
            let plus = rng.gen::<bool>();
            let attractor = gbest[j] + phi * (p[j] - gbest[j]);
            let step = alpha * (mbest[j] - x[j]).abs() * (1.0 / u).ln();
            let next = if plus { attractor + step } else { attractor - step };
            x[j] = next.clamp(0.0, 1.0);
        }
    }
}

fn sanitize(f: f64) -> f64 {
    if f.is_finite() {
        f
    } else {
        f64::INFINITY
    }
}

struct Evaluator<'a, F> {
    fitness: &'a F,
    space: &'a SearchSpace,
    count: usize,
}

impl<F> Evaluator<'_, F>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn eval_many(&mut self, points: &[&[f64]]) -> Vec<f64> {
        self.count += points.len();
        let (fitness, space) = (self.fitness, self.space);
        points
            .par_iter()
            .map(|z| sanitize(fitness(&space.denormalize(z))))
            .collect()
    }
}

fn index_of_min(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

/// Runs EBQPSO, minimizing `fitness` over `space`.
pub fn run<F>(fitness: F, space: &SearchSpace, config: &EbqpsoConfig) -> Result<OptimizationTrace>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize(&fitness, space, config, true)
}

/// Plain QPSO: the same driver with breeding switched off.
pub fn run_qpso<F>(fitness: F, space: &SearchSpace, config: &EbqpsoConfig) -> Result<OptimizationTrace>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    optimize(&fitness, space, config, false)
}

fn optimize<F>(
    fitness: &F,
    space: &SearchSpace,
    config: &EbqpsoConfig,
    breeding: bool,
) -> Result<OptimizationTrace>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    space.validate()?;
    let d = space.dim();
    config.validate(d)?;
    let m = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut eval = Evaluator {
        fitness,
        space,
        count: 0,
    };

    let mut positions: Vec<Vec<f64>> = (0..m)
        .map(|_| (0..d).map(|_| rng.gen::<f64>()).collect())
        .collect();
    let refs: Vec<&[f64]> = positions.iter().map(Vec::as_slice).collect();
    let mut pbest_fit = eval.eval_many(&refs);
    let mut pbest = positions.clone();

    let first = index_of_min(&pbest_fit);
    let mut gbest = pbest[first].clone();
    let mut gbest_fit = pbest_fit[first];
    let mut history = Vec::with_capacity(config.generations);

    for t in 1..=config.generations {
        let best = index_of_min(&pbest_fit);
        if pbest_fit[best] < gbest_fit {
            gbest = pbest[best].clone();
            gbest_fit = pbest_fit[best];
        }
        let mbest = mean_best(&pbest)?;

        if breeding && t % config.lambda == 0 {
            let mut pool = pbest.clone();
            pool.push(gbest.clone());
            let bred = transposon_operator(
                &pool,
                config.jumping_rate,
                config.transposon_count,
                config.transposon_size,
                &mut rng,
            );
            let changed: Vec<usize> = (0..=m).filter(|&i| bred[i] != pool[i]).collect();
            let refs: Vec<&[f64]> = changed.iter().map(|&i| bred[i].as_slice()).collect();
            let scores = eval.eval_many(&refs);
            for (&i, &f) in changed.iter().zip(&scores) {
                if i < m {
                    if f < pbest_fit[i] {
                        pbest[i] = bred[i].clone();
                        pbest_fit[i] = f;
                    }
                } else if f < gbest_fit {
                    gbest = bred[i].clone();
                    gbest_fit = f;
                }
            }
            let best = index_of_min(&pbest_fit);
            if pbest_fit[best] < gbest_fit {
                gbest = pbest[best].clone();
                gbest_fit = pbest_fit[best];
            }
        }

        let alpha = contraction_expansion(t, config.generations, config.ce_mode);
        qpso_step(&mut positions, &pbest, &gbest, &mbest, alpha, &mut rng);
        let refs: Vec<&[f64]> = positions.iter().map(Vec::as_slice).collect();
        let scores = eval.eval_many(&refs);
        for i in 0..m {
            if scores[i] < pbest_fit[i] {
                pbest[i] = positions[i].clone();
                pbest_fit[i] = scores[i];
                if scores[i] < gbest_fit {
                    gbest = positions[i].clone();
                    gbest_fit = scores[i];
                }
            }
        }
        history.push(gbest_fit);
    }

    Ok(OptimizationTrace {
        best_position: space.denormalize(&gbest),
        best_fitness: gbest_fit,
        fitness_history: history,
        evaluation_count: eval.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::atomic::{AtomicUsize, Ordering};

    #[test]
    fn mean_best_examples() {
        assert_eq!(mean_best(&[vec![1.0, 1.0], vec![3.0, 3.0]]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(mean_best(&[vec![0.3, 0.7]]).unwrap(), vec![0.3, 0.7]);
        assert!(mean_best(&[]).is_err());
    }

    #[test]
    fn mean_best_matches_summation() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let swarm: Vec<Vec<f64>> = (0..25).map(|_| (0..7).map(|_| rng.gen()).collect()).collect();
        let m = mean_best(&swarm).unwrap();
        for j in 0..7 {
            let mut s = 0.0;
            for p in &swarm {
                s += p[j];
            }
            assert!((m[j] - s / 25.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ce_schedules() {
        assert_eq!(contraction_expansion(0, 100, CeMode::LinearDecay), 1.0);
        assert_eq!(contraction_expansion(100, 100, CeMode::LinearDecay), 0.5);
        assert_eq!(contraction_expansion(50, 100, CeMode::LinearDecay), 0.75);
        for t in [0, 17, 100] {
            assert_eq!(contraction_expansion(t, 100, CeMode::Fixed(0.5)), 0.5);
        }
    }

    #[test]
    fn coincident_swarm_is_fixed_point() {
        let x = vec![0.3, 0.6, 0.9];
        let mut positions = vec![x.clone(); 4];
        let pbest = positions.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            qpso_step(&mut positions, &pbest, &x, &x, 0.8, &mut rng);
        }
        assert!(positions.iter().all(|p| *p == x));
    }

    #[test]
    fn zero_alpha_jumps_to_attractor() {
        let mut positions = vec![vec![0.9], vec![0.1]];
        let pbest = vec![vec![0.4], vec![0.4]];
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        qpso_step(&mut positions, &pbest, &[0.4], &[0.7], 0.0, &mut rng);
        assert!(positions.iter().all(|p| (p[0] - 0.4).abs() < 1e-15));
    }

    #[test]
    fn qpso_step_is_reproducible() {
        let run = || {
            let mut positions = vec![vec![0.2], vec![0.8]];
            let pbest = vec![vec![0.25], vec![0.7]];
            let mut rng = ChaCha8Rng::seed_from_u64(77);
            qpso_step(&mut positions, &pbest, &[0.25], &[0.475], 0.5, &mut rng);
            positions
        };
        let a = run();
        assert_eq!(a, run());
        assert!(a.iter().all(|p| (0.0..=1.0).contains(&p[0])));
    }

    #[test]
    fn constant_fitness_gives_flat_history() {
        let space = SearchSpace::uniform(-1.0, 1.0, 3).unwrap();
        let cfg = EbqpsoConfig {
            population: 6,
            generations: 10,
            ..Default::default()
        };
        let trace = run(|_| 4.5, &space, &cfg).unwrap();
        assert_eq!(trace.best_fitness, 4.5);
        assert!(trace.fitness_history.iter().all(|&f| f == 4.5));
    }

    #[test]
    fn non_finite_fitness_is_worst() {
        let space = SearchSpace::uniform(-1.0, 1.0, 1).unwrap();
        let cfg = EbqpsoConfig {
            population: 5,
            generations: 10,
            ..Default::default()
        };
        let trace = run(|x| if x[0] > 0.0 { f64::NAN } else { -x[0] }, &space, &cfg).unwrap();
        assert!(trace.best_fitness.is_finite());
        assert!(trace.best_position[0] <= 0.0);
    }

    #[test]
    fn budget_and_bounds_respected() {
        let space = SearchSpace::new(
            vec![1e-4, 1e-4, 1.0],
            vec![1e4, 1e4, 25.0],
            vec![true, true, false],
            vec![false, false, true],
        )
        .unwrap();
        let cfg = EbqpsoConfig {
            population: 10,
            generations: 20,
            jumping_rate: 1.0,
            ..Default::default()
        };
        let calls = AtomicUsize::new(0);
        let trace = run(
            |x| {
                calls.fetch_add(1, Ordering::Relaxed);
                assert!(x[0] >= 1e-4 && x[0] <= 1e4);
                assert!(x[2] >= 1.0 && x[2] <= 25.0 && x[2].fract() == 0.0);
                (x[0].log10() - 1.0).powi(2) + (x[1].log10() + 2.0).powi(2) + (x[2] - 7.0).powi(2)
            },
            &space,
            &cfg,
        )
        .unwrap();
        assert_eq!(calls.load(Ordering::Relaxed), trace.evaluation_count);
        assert!(trace.evaluation_count <= cfg.evaluation_budget());
        assert!(trace.evaluation_count > cfg.population * (cfg.generations + 1));
        assert!(trace.fitness_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn deterministic_under_seed() {
        let space = SearchSpace::uniform(-5.0, 5.0, 4).unwrap();
        let cfg = EbqpsoConfig {
            population: 8,
            generations: 15,
            seed: 42,
            ..Default::default()
        };
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        assert_eq!(run(f, &space, &cfg).unwrap(), run(f, &space, &cfg).unwrap());
    }

    #[test]
    fn config_validation() {
        let cfg = EbqpsoConfig {
            transposon_size: 4,
            ..Default::default()
        };
        assert!(cfg.validate(3).is_err());
        let cfg = EbqpsoConfig {
            lambda: 200,
            ..Default::default()
        };
        assert!(cfg.validate(3).is_err());
        assert!(EbqpsoConfig::default().validate(3).is_ok());
        assert_eq!(EbqpsoConfig::default().evaluation_budget(), 100 * 25 * 7 / 5 + 25);
    }
}
