//! `windcast`: decomposition, hyperparameter search, forecasting and
//! benchmarking from the command line.
//!
//! Exit codes: 0 on success, 2 for invalid input or configuration, 3 for
//! numerical failures.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use windcast_core::ebqpso::benchmark::{bench_opt, benchmark_config, Algorithm, BenchFunction};
use windcast_core::ebqpso::CeMode;
use windcast_core::metrics::MetricSet;
use windcast_core::pipeline::data::{first_column, load_series};
use windcast_core::pipeline::synthetic::{generate, SyntheticSpec};
use windcast_core::pipeline::{
    impute, optimize_mode, run_pipeline, write_report, PipelineConfig, SplitSpec, Variant,
};
use windcast_core::svmd::{decompose, mode_correlation_matrix, Series, SvmdConfig};
use windcast_core::{Error, Result};

#[derive(Parser)]
#[command(name = "windcast", version, about = "Hybrid short-term wind speed forecasting")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split a series into modes and a residual.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "wind_speed")]
        column: String,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 5000.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        #[arg(long, default_value_t = 10)]
        max_modes: usize,
        #[arg(long, default_value_t = 1e-3)]
        residual_energy_ratio: f64,
    },
    /// Tune (γ, σ², window) for one LSSVM on a column.
    Optimize {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "wind_speed")]
        column: String,
        /// Take swarm settings and search bounds from this config file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        pop: Option<usize>,
        #[arg(long)]
        gens: Option<usize>,
    },
    /// Run the forecasting pipeline described by a config file.
    Forecast {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `io.output_dir`.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Overrides `pipeline.variant`.
        #[arg(long)]
        variant: Option<String>,
        /// Overrides `pipeline.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the LSTM loss trace.
        #[arg(long)]
        trace: bool,
    },
    /// Compare optimizers on a benchmark function.
    BenchOpt {
        #[arg(long)]
        function: String,
        #[arg(long, default_value_t = 20)]
        dim: usize,
        #[arg(long, default_value_t = 25)]
        pop: usize,
        #[arg(long, default_value_t = 100)]
        gens: usize,
        #[arg(long, default_value_t = 5)]
        trials: usize,
        #[arg(long, default_value = "ebqpso")]
        algo: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        jumping_rate: Option<f64>,
        #[arg(long)]
        lambda: Option<usize>,
        #[arg(long)]
        transposon_count: Option<usize>,
        #[arg(long)]
        transposon_size: Option<usize>,
        /// Contraction-expansion coefficient; `linear` for the decaying schedule.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Score predictions against actual values.
    Metrics {
        #[arg(long)]
        actual: PathBuf,
        #[arg(long)]
        predicted: PathBuf,
        /// Column in the actual file (default: first column).
        #[arg(long)]
        actual_column: Option<String>,
        /// Column in the predicted file (default: first column).
        #[arg(long)]
        predicted_column: Option<String>,
    },
    /// Write the synthetic wind-speed dataset.
    Synth {
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value_t = 1440)]
        length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.35)]
        noise_std: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("windcast: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn print_json(value: &serde_json::Value) -> Result<()> {
    let mut out = std::io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(value)?)?;
    Ok(())
}

fn read_column(path: &Path, column: Option<&str>) -> Result<Vec<f64>> {
    let column = match column {
        Some(c) => c.to_string(),
        None => first_column(path)?,
    };
    let raw = load_series(path, &column)?;
    if let Some(k) = raw.missing.iter().position(|&m| m) {
        return Err(Error::InvalidInput(format!(
            "{}: row {} of `{column}` is empty",
            path.display(),
            k + 1
        )));
    }
    Ok(raw.values)
}

/// Loads a column and fills gaps with the mean of its default training segment.
fn load_clean(path: &Path, column: &str) -> Result<Vec<f64>> {
    let raw = load_series(path, column)?;
    let seg = SplitSpec::default().segments(raw.len())?;
    Ok(impute(&raw, seg.train_end, Some(5.0))?.values)
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Decompose {
            input,
            column,
            out_dir,
            alpha,
            tau,
            max_modes,
            residual_energy_ratio,
        } => {
            let values = load_clean(&input, &column)?;
            let cfg = SvmdConfig {
                alpha,
                tau,
                max_modes,
                residual_energy_ratio,
                ..SvmdConfig::default()
            };
            let result = decompose(&Series::new(values), &cfg)?;
            fs::create_dir_all(&out_dir)?;
            for (k, mode) in result.modes.iter().enumerate() {
                write_values(&out_dir.join(format!("mode_{k}.csv")), &mode.values)?;
            }
            write_values(&out_dir.join("residual.csv"), &result.residual)?;
            let corr = if result.modes.is_empty() {
                Vec::new()
            } else {
                mode_correlation_matrix(&result)?.values
            };
            let summary = json!({
                "num_modes": result.modes.len(),
                "center_frequencies": result.center_frequencies(),
                "residual_energy_ratio": result.residual_energy_ratio(),
                "correlation_matrix": corr,
            });
            fs::write(
                out_dir.join("summary.json"),
                serde_json::to_string_pretty(&summary)? + "\n",
            )?;
            print_json(&summary)
        }
        Command::Optimize {
            input,
            column,
            config,
            seed,
            pop,
            gens,
        } => {
            let mut cfg = match config {
                Some(path) => PipelineConfig::load(&path)?,
                None => PipelineConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.ebqpso.seed = cfg.seed;
            if let Some(p) = pop {
                cfg.ebqpso.population = p;
            }
            if let Some(g) = gens {
                cfg.ebqpso.generations = g;
            }
            cfg.ebqpso.validate(3)?;
            let values = load_clean(&input, &column)?;
            let plan = optimize_mode(&values, 0, &cfg.split, &cfg.ebqpso, &cfg.bounds)?;
            print_json(&serde_json::to_value(&plan)?)
        }
        Command::Forecast {
            config,
            output,
            variant,
            seed,
            trace,
        } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if let Some(dir) = output {
                cfg.output_dir = dir;
            }
            if let Some(v) = variant {
                cfg.variant = v.parse::<Variant>()?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.trace |= trace;
            let report = run_pipeline(&cfg)?;
            write_report(&report, &cfg.output_dir)?;
            print_json(&report.metrics.to_json())
        }
        Command::BenchOpt {
            function,
            dim,
            pop,
            gens,
            trials,
            algo,
            seed,
            jumping_rate,
            lambda,
            transposon_count,
            transposon_size,
            alpha,
        } => {
            let function: BenchFunction = function.parse()?;
            let algorithm: Algorithm = algo.parse()?;
            let mut cfg = benchmark_config(seed);
            cfg.population = pop;
            cfg.generations = gens;
            if let Some(v) = jumping_rate {
                cfg.jumping_rate = v;
            }
            if let Some(v) = lambda {
                cfg.lambda = v;
            }
            if let Some(v) = transposon_count {
                cfg.transposon_count = v;
            }
            if let Some(v) = transposon_size {
                cfg.transposon_size = v;
            }
            if let Some(a) = alpha {
                cfg.ce_mode = if a == "linear" {
                    CeMode::LinearDecay
                } else {
                    CeMode::Fixed(a.parse().map_err(|_| {
                        Error::InvalidInput(format!("--alpha expects a number or `linear`, got `{a}`"))
                    })?)
                };
            }
            // Keep the transposon inside short chromosomes such as McCormick's.
            cfg.transposon_size = cfg.transposon_size.min(dim.max(1));
            let report = bench_opt(function, dim, algorithm, &cfg, trials)?;
            print_json(&serde_json::to_value(&report)?)
        }
        Command::Metrics {
            actual,
            predicted,
            actual_column,
            predicted_column,
        } => {
            let a = read_column(&actual, actual_column.as_deref())?;
            let p = read_column(&predicted, predicted_column.as_deref())?;
            print_json(&MetricSet::compute(&a, &p)?.to_json())
        }
        Command::Synth {
            output,
            length,
            seed,
            noise_std,
        } => {
            let values = generate(&SyntheticSpec {
                length,
                noise_std,
                seed,
            })?;
            let mut text = String::from("index,wind_speed\n");
            for (k, v) in values.iter().enumerate() {
                text.push_str(&format!("{k},{v}\n"));
            }
            match output {
                Some(path) => fs::write(path, text)?,
                None => std::io::stdout().lock().write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}

fn write_values(path: &Path, values: &[f64]) -> Result<()> {
    let mut text = String::from("index,value\n");
    for (k, v) in values.iter().enumerate() {
        text.push_str(&format!("{k},{v}\n"));
    }
    fs::write(path, text)?;
    Ok(())
}
