//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use windcast_core::ebqpso::benchmark::{bench_opt, benchmark_config, Algorithm, BenchFunction};
use windcast_core::ebqpso::{run, EbqpsoConfig, SearchSpace};
use windcast_core::lssvm::{self, LssvmHyper, TrainingSet};
use windcast_core::lstm::{self, LstmWeights};
use windcast_core::metrics::{self, EvalPair};
use windcast_core::pipeline::data::RawSeries;
use windcast_core::pipeline::synthetic::{generate, SyntheticSpec};
use windcast_core::pipeline::{run_variants_on, PipelineConfig, Variant};
use windcast_core::svmd::{decompose, mode_correlation_matrix, Series, SvmdConfig};

type Outcome = Result<String, String>;

const TRIALS: usize = 5;
const BENCH_SEED: u64 = 1;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64()
}

fn bench_dim(f: BenchFunction) -> usize {
    if f == BenchFunction::McCormick {
        2
    } else {
        20
    }
}

fn bench_base(f: BenchFunction) -> EbqpsoConfig {
    let mut cfg = benchmark_config(BENCH_SEED);
    cfg.transposon_size = cfg.transposon_size.min(bench_dim(f));
    cfg
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut ok = true;
    for f in BenchFunction::ALL {
        let r = bench_opt(f, bench_dim(f), Algorithm::Ebqpso, &bench_base(f), TRIALS)
            .map_err(|e| e.to_string())?;
        let pass = match f {
            BenchFunction::Sphere => r.mean <= 1e-10,
            BenchFunction::Ackley => r.mean <= 1e-6,
            BenchFunction::Griewank => r.mean <= 1e-2,
            BenchFunction::McCormick => (r.mean - (-1.9133)).abs() <= 1e-3,
        };
        ok &= pass;
        notes.push(format!("{f:?} {:.3e}", r.mean));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    check(ok, format!("{}; {:.1} s", notes.join(", "), secs(elapsed)))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut wins = 0;
    let mut notes = Vec::new();
    for f in BenchFunction::ALL {
        let base = bench_base(f);
        let e = bench_opt(f, bench_dim(f), Algorithm::Ebqpso, &base, TRIALS).map_err(|e| e.to_string())?;
        let q = bench_opt(f, bench_dim(f), Algorithm::Qpso, &base, TRIALS).map_err(|e| e.to_string())?;
        if e.mean <= q.mean {
            wins += 1;
        }
        notes.push(format!("{f:?} {:.2e} vs {:.2e}", e.mean, q.mean));
    }
    let elapsed = start.elapsed();
    check(
        wins >= 3 && elapsed < Duration::from_secs(120),
        format!("{wins}/4 ({}); {:.1} s", notes.join(", "), secs(elapsed)),
    )
}

fn criterion_3() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let cases = [(10usize, 20usize, 3usize, 1.0), (25, 100, 20, 1.0), (7, 13, 5, 0.5), (25, 100, 2, 0.3)];
    for (case, &(m, t, d, rate)) in cases.iter().enumerate() {
        for seed in 0..3u64 {
            let cfg = EbqpsoConfig {
                population: m,
                generations: t,
                lambda: 5,
                jumping_rate: rate,
                transposon_count: 3,
                transposon_size: 1,
                seed: seed + 10 * case as u64,
                ..EbqpsoConfig::default()
            };
            let space = SearchSpace::uniform(-5.0, 5.0, d).map_err(|e| e.to_string())?;
            let counter = AtomicUsize::new(0);
            let trace = run(
                |x: &[f64]| {
                    counter.fetch_add(1, Ordering::Relaxed);
                    x.iter().map(|v| v * v).sum()
                },
                &space,
                &cfg,
            )
            .map_err(|e| e.to_string())?;
            let counted = counter.load(Ordering::Relaxed);
            let bound = t * m * (2 + 5) / 5 + m;
            ok &= counted <= bound && counted == trace.evaluation_count;
            worst = worst.max(counted as f64 / bound as f64);
        }
    }
    check(ok, format!("{} runs, peak usage {:.1}% of budget", cases.len() * 3, 100.0 * worst))
}

fn gaussian_kernel(a: &[f64], b: &[f64], sigma2: f64) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-d2 / (2.0 * sigma2)).exp()
}

/// Dense elimination with partial pivoting on the bordered system
/// `[0 1ᵀ; 1 Ω + I/γ] [b; a] = [0; y]`.
fn elimination_oracle(rows: &[Vec<f64>], y: &[f64], gamma: f64, sigma2: f64) -> (f64, Vec<f64>) {
    let n = y.len() + 1;
    let mut m = vec![vec![0.0; n + 1]; n];
    for j in 1..n {
        m[0][j] = 1.0;
        m[j][0] = 1.0;
        m[j][n] = y[j - 1];
        for k in 1..n {
            m[j][k] = gaussian_kernel(&rows[j - 1], &rows[k - 1], sigma2);
        }
        m[j][j] += 1.0 / gamma;
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for r in (col + 1)..n {
            let factor = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= factor * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let tail: f64 = ((r + 1)..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - tail) / m[r][r];
    }
    (x[0], x[1..].to_vec())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut max_diff, mut max_kkt, mut max_sum): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut ok = true;
    for _ in 0..20 {
        let n = rng.gen_range(2..=50);
        let dim = rng.gen_range(1..=6);
        let gamma = 10f64.powf(rng.gen_range(-1.0..2.0));
        let sigma2 = 10f64.powf(rng.gen_range(-0.5..1.0));
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let data = TrainingSet::from_rows(&rows, y.clone()).map_err(|e| e.to_string())?;
        let model = lssvm::train(&data, LssvmHyper::new(gamma, sigma2).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;

        let (b, a) = elimination_oracle(&rows, &y, gamma, sigma2);
        let scale = a.iter().fold(b.abs(), |s, v| s.max(v.abs())).max(1.0);
        let diff = a
            .iter()
            .zip(&model.duals)
            .map(|(o, m)| (o - m).abs())
            .fold((b - model.bias).abs(), f64::max)
            / scale;
        max_diff = max_diff.max(diff);

        // KKT residual recomputed from the returned solution.
        let a_m = &model.duals;
        let r0: f64 = a_m.iter().sum();
        let mut r_sq = r0 * r0;
        for i in 0..n {
            let ka: f64 = (0..n).map(|j| gaussian_kernel(&rows[i], &rows[j], sigma2) * a_m[j]).sum();
            let r = ka + a_m[i] / gamma + model.bias - y[i];
            r_sq += r * r;
        }
        let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt().max(1.0);
        let kkt = r_sq.sqrt() / y_norm;
        max_kkt = max_kkt.max(kkt).max(model.kkt_residual);

        let l1: f64 = a_m.iter().map(|v| v.abs()).sum();
        max_sum = max_sum.max(r0.abs() / (1e-8 * l1 + 1e-12));
        ok &= diff <= 1e-9 && kkt < 1e-8 && model.kkt_residual < 1e-8 && r0.abs() < 1e-8 * l1 + 1e-12;
    }
    check(
        ok,
        format!("max |Δ| {max_diff:.1e}, max KKT {max_kkt:.1e}, max |Σa|/bound {max_sum:.2}"),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let n = 1024;
    let x: Vec<f64> = (0..n)
        .map(|t| {
            let t = t as f64;
            (2.0 * PI * 0.05 * t).sin() + 0.8 * (2.0 * PI * 0.20 * t).sin() + 0.001 * t
        })
        .collect();
    let out = decompose(&Series::new(x.clone()), &SvmdConfig::default()).map_err(|e| e.to_string())?;
    let freqs = out.center_frequencies();
    let mut ok = true;
    let mut notes = Vec::new();
    for target in [0.05, 0.20] {
        let w = 2.0 * PI * target;
        let err = freqs.iter().map(|f| (f - w).abs() / w).fold(f64::INFINITY, f64::min);
        ok &= err <= 0.05;
        notes.push(format!("tone {target}: {:.2}%", 100.0 * err));
    }
    let sum = out.mode_sum();
    let num: f64 = x
        .iter()
        .zip(&sum)
        .zip(&out.residual)
        .map(|((xi, s), r)| (xi - s - r).powi(2))
        .sum::<f64>()
        .sqrt();
    let den = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let recon = num / den;
    let corr = mode_correlation_matrix(&out).map_err(|e| e.to_string())?.max_off_diagonal();
    let elapsed = start.elapsed();
    ok &= recon < 1e-9 && corr < 0.30 && elapsed < Duration::from_secs(30);
    check(
        ok,
        format!(
            "{} modes, {}, reconstruction {recon:.1e}, max corr {corr:.3}; {:.1} s",
            out.modes.len(),
            notes.join(", "),
            secs(elapsed)
        ),
    )
}

fn criterion_6() -> Outcome {
    let eps = 1e-5;
    let mut worst: f64 = 0.0;
    for point in 0..3u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + point);
        let series: Vec<f64> = (0..30).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let batch = TrainingSet::lagged(&series, 5).map_err(|e| e.to_string())?;
        let mut w = LstmWeights::init(1, 8, 7 + point);
        // Move away from the initializer so every gate is exercised.
        for t in w.tensors_mut() {
            for v in t.iter_mut() {
                *v += rng.gen_range(-0.5..0.5);
            }
        }
        let (grad, _) = lstm::gradients(&batch, &w).map_err(|e| e.to_string())?;
        let analytic: Vec<Vec<f64>> = grad.tensors().iter().map(|t| t.to_vec()).collect();
        for (ti, tensor) in analytic.iter().enumerate() {
            for (k, &a) in tensor.iter().enumerate() {
                let mut plus = w.clone();
                plus.tensors_mut()[ti][k] += eps;
                let mut minus = w.clone();
                minus.tensors_mut()[ti][k] -= eps;
                let lp = lstm::batch_loss(&batch, &plus).map_err(|e| e.to_string())?;
                let lm = lstm::batch_loss(&batch, &minus).map_err(|e| e.to_string())?;
                let numeric = (lp - lm) / (2.0 * eps);
                let denom = a.abs().max(numeric.abs()).max(1e-6);
                worst = worst.max((a - numeric).abs() / denom);
            }
        }
    }
    check(worst < 1e-4, format!("hidden 8, 10 tensors, max relative error {worst:.2e}"))
}

fn criterion_7() -> Outcome {
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12;
    let actual = [1.0, 2.0, 3.0, 4.0];
    let shifted = [2.0, 3.0, 4.0, 5.0];
    let p = EvalPair::new(&actual, &shifted).map_err(|e| e.to_string())?;
    let mut ok = close(metrics::mae(&p), 1.0)
        && close(metrics::rmse(&p), 1.0)
        && close(metrics::mape(&p).map_err(|e| e.to_string())?, 100.0 * (1.0 + 0.5 + 1.0 / 3.0 + 0.25) / 4.0)
        && close(metrics::cc(&p).map_err(|e| e.to_string())?, 1.0)
        && close(metrics::r2(&p).map_err(|e| e.to_string())?, 1.0 - 4.0 / 5.0);

    let mixed = [2.0, 2.0, 5.0, 3.0];
    let p = EvalPair::new(&actual, &mixed).map_err(|e| e.to_string())?;
    // Errors 1, 0, 2, -1: |e| sums to 4, e² to 6.
    ok &= close(metrics::mae(&p), 1.0) && close(metrics::rmse(&p), 1.5f64.sqrt());

    let reversed = [4.0, 3.0, 2.0, 1.0];
    let p = EvalPair::new(&actual, &reversed).map_err(|e| e.to_string())?;
    ok &= close(metrics::cc(&p).map_err(|e| e.to_string())?, -1.0);

    let mean = [2.5; 4];
    let p = EvalPair::new(&actual, &mean).map_err(|e| e.to_string())?;
    ok &= close(metrics::r2(&p).map_err(|e| e.to_string())?, 0.0);

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=40);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-50.0..50.0)).collect();
        let p = EvalPair::new(&a, &b).map_err(|e| e.to_string())?;
        if metrics::rmse(&p) < metrics::mae(&p) * (1.0 - 1e-12) {
            violations += 1;
        }
    }
    ok &= violations == 0;
    check(ok, format!("hand examples exact, RMSE < MAE in {violations}/1000 random pairs"))
}

/// Reduced swarm and residual model used for the end-to-end checks.
fn reduced_config(seed: u64) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        seed,
        ..PipelineConfig::default()
    };
    cfg.ebqpso.population = 10;
    cfg.ebqpso.generations = 10;
    cfg.lstm.hidden_size = 8;
    cfg.lstm.epochs = 200;
    cfg.lstm.learning_rate = 1e-2;
    cfg
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for seed in 0..3u64 {
        let values = generate(&SyntheticSpec {
            seed,
            ..SyntheticSpec::default()
        })
        .map_err(|e| e.to_string())?;
        let reports = run_variants_on(&RawSeries::from_values(values), &reduced_config(seed), &Variant::ALL)
            .map_err(|e| e.to_string())?;
        let rmse = |v: Variant| reports.iter().find(|r| r.variant == v).map(|r| r.metrics.rmse).unwrap();
        let full = rmse(Variant::SvmdLssvmLstm);
        let plain = rmse(Variant::LssvmEbqpso);
        let svmd = rmse(Variant::SvmdLssvm);
        ok &= full <= plain && full <= svmd * 1.05;
        notes.push(format!("seed {seed}: {full:.4} / {plain:.4} / {svmd:.4}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(600);
    check(
        ok,
        format!("full / lssvm_ebqpso / svmd_lssvm RMSE: {}; {:.0} s", notes.join(", "), secs(elapsed)),
    )
}

fn windcast(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_windcast"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let root = dir.path();
    let data = root.join("wind.csv");
    windcast(&["synth", "--output", path_str(&data)?, "--length", "480", "--seed", "3"])?;
    let config = root.join("run.conf");
    fs::write(
        &config,
        "io.input = wind.csv\n\
         pipeline.seed = 5\n\
         ebqpso.population = 6\n\
         ebqpso.generations = 5\n\
         svmd.max_modes = 4\n\
         lstm.hidden_size = 4\n\
         lstm.epochs = 30\n\
         lstm.learning_rate = 0.01\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = root.join(run);
        windcast(&["forecast", "--config", path_str(&config)?, "--output", path_str(&out)?])?;
        outputs.push(out);
    }
    let mut ok = true;
    for file in ["predictions.csv", "metrics.json"] {
        let a = fs::read(outputs[0].join(file)).map_err(|e| e.to_string())?;
        let b = fs::read(outputs[1].join(file)).map_err(|e| e.to_string())?;
        ok &= !a.is_empty() && a == b;
    }
    check(ok, "predictions.csv and metrics.json byte-identical across two runs".into())
}

fn path_str(p: &Path) -> Result<&str, String> {
    p.to_str().ok_or_else(|| format!("non-UTF-8 path {}", p.display()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("benchmark optimizer suite", criterion_1),
        ("EBQPSO vs QPSO ordering", criterion_2),
        ("evaluation budget", criterion_3),
        ("LSSVM oracle equivalence", criterion_4),
        ("SVMD synthetic recovery", criterion_5),
        ("LSTM gradient check", criterion_6),
        ("metrics exactness", criterion_7),
        ("end-to-end ordering", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = f();
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} {}. {name}: {detail}", k + 1);
        failed += usize::from(outcome.is_err());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
