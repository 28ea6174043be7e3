//! Inertia-weight PSO, kept only as a comparison baseline.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{EbqpsoConfig, OptimizationTrace, SearchSpace};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsoCoefficients {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp in unit-cube coordinates.
    pub max_velocity: f64,
}

impl Default for PsoCoefficients {
    fn default() -> Self {
        PsoCoefficients {
            inertia: 0.729,
            cognitive: 1.494,
            social: 1.494,
            max_velocity: 0.2,
        }
    }
}

/// Minimizes `fitness` with velocity-based PSO. Uses `population`,
/// `generations` and `seed` from `config`; the breeding fields are ignored.
pub fn run_pso<F>(
    fitness: F,
    space: &SearchSpace,
    config: &EbqpsoConfig,
    coeffs: PsoCoefficients,
) -> Result<OptimizationTrace>
where
    F: Fn(&[f64]) -> f64,
{
    space.validate()?;
    let d = space.dim();
    let m = config.population;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut count = 0usize;
    let mut eval = |z: &[f64]| {
        count += 1;
        let f = fitness(&space.denormalize(z));
        if f.is_finite() {
            f
        } else {
            f64::INFINITY
        }
    };

    let mut x: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.gen()).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..m)
        .map(|_| {
            (0..d)
                .map(|_| rng.gen_range(-coeffs.max_velocity..=coeffs.max_velocity))
                .collect()
        })
        .collect();
    let mut pbest = x.clone();
    let mut pbest_fit: Vec<f64> = x.iter().map(|p| eval(p)).collect();
    let mut g = 0;
    for i in 1..m {
        if pbest_fit[i] < pbest_fit[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gbest_fit = pbest_fit[g];
    let mut history = Vec::with_capacity(config.generations);

    for _ in 0..config.generations {
        for i in 0..m {
            for j in 0..d {
                let r1: f64 = rng.gen();
                let r2: f64 = rng.gen();
                let vel = coeffs.inertia * v[i][j]
                    + coeffs.cognitive * r1 * (pbest[i][j] - x[i][j])
                    + coeffs.social * r2 * (gbest[j] - x[i][j]);
                v[i][j] = vel.clamp(-coeffs.max_velocity, coeffs.max_velocity);
                x[i][j] = (x[i][j] + v[i][j]).clamp(0.0, 1.0);
            }
            let f = eval(&x[i]);
            if f < pbest_fit[i] {
                pbest[i] = x[i].clone();
                pbest_fit[i] = f;
                if f < gbest_fit {
                    gbest = x[i].clone();
                    gbest_fit = f;
                }
            }
        }
        history.push(gbest_fit);
    }

    Ok(OptimizationTrace {
        best_position: space.denormalize(&gbest),
        best_fitness: gbest_fit,
        fitness_history: history,
        evaluation_count: count,
    })
}
