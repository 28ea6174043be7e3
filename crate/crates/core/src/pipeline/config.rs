//! Run configuration in a flat `key = value` text format.
//!
//! One assignment per line; `#` starts a comment; blank lines are ignored.
//! Keys are dotted (`svmd.alpha`, `lstm.epochs`, ...). Unknown or repeated
//! keys are errors. Relative paths are resolved against the directory of the
//! config file. Every key except `io.input` has a default.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SplitSpec;
use crate::ebqpso::{CeMode, EbqpsoConfig, SearchSpace};
use crate::error::{Error, Result};
use crate::lstm::LstmConfig;
use crate::svmd::SvmdConfig;

/// Which model the pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// One tuned LSSVM on the raw series.
    LssvmEbqpso,
    /// Tuned LSSVM per decomposed mode, no residual model.
    SvmdLssvm,
    /// The full hybrid: per-mode LSSVMs plus the LSTM residual model.
    SvmdLssvmLstm,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::LssvmEbqpso, Variant::SvmdLssvm, Variant::SvmdLssvmLstm];

    pub fn uses_svmd(self) -> bool {
        self != Variant::LssvmEbqpso
    }

    pub fn uses_lstm(self) -> bool {
        self == Variant::SvmdLssvmLstm
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::LssvmEbqpso => "lssvm_ebqpso",
            Variant::SvmdLssvm => "svmd_lssvm",
            Variant::SvmdLssvmLstm => "svmd_lssvm_lstm",
        })
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| Error::Config(format!("unknown variant `{s}`")))
    }
}

/// LSSVM hyperparameter box searched per mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub gamma: (f64, f64),
    pub sigma2: (f64, f64),
    pub window: (usize, usize),
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            gamma: (1e-4, 1e4),
            sigma2: (1e-4, 1e4),
            window: (1, 25),
        }
    }
}

impl SearchBounds {
    /// `(γ, σ², m)` with γ and σ² searched in log10.
    pub fn space(&self) -> Result<SearchSpace> {
        if self.window.0 == 0 {
            return Err(Error::Config("window_min must be at least 1".into()));
        }
        SearchSpace::new(
            vec![self.gamma.0, self.sigma2.0, self.window.0 as f64],
            vec![self.gamma.1, self.sigma2.1, self.window.1 as f64],
            vec![true, true, false],
            vec![false, false, true],
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub input: PathBuf,
    pub column: String,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub variant: Variant,
    pub split: SplitSpec,
    /// Outlier threshold in training standard deviations; `None` disables.
    pub outlier_std: Option<f64>,
    /// Also write the LSTM loss trace.
    pub trace: bool,
    pub svmd: SvmdConfig,
    /// Swarm settings; the seed is replaced per mode.
    pub ebqpso: EbqpsoConfig,
    pub bounds: SearchBounds,
    /// Residual model settings; the seed is replaced by the run seed.
    pub lstm: LstmConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            input: PathBuf::new(),
            column: "wind_speed".into(),
            output_dir: PathBuf::from("windcast-out"),
            seed: 0,
            variant: Variant::SvmdLssvmLstm,
            split: SplitSpec::default(),
            outlier_std: Some(5.0),
            trace: false,
            svmd: SvmdConfig::default(),
            ebqpso: EbqpsoConfig::default(),
            bounds: SearchBounds::default(),
            lstm: LstmConfig::default(),
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

fn parse_ce(value: &str) -> Result<CeMode> {
    if value == "linear_decay" {
        return Ok(CeMode::LinearDecay);
    }
    value
        .strip_prefix("fixed:")
        .and_then(|a| a.parse().ok())
        .map(CeMode::Fixed)
        .ok_or_else(|| Error::Config(format!("`ebqpso.ce_mode`: expected `fixed:<a>` or `linear_decay`, got `{value}`")))
}

fn format_ce(mode: CeMode) -> String {
    match mode {
        CeMode::Fixed(a) => format!("fixed:{a}"),
        CeMode::LinearDecay => "linear_decay".into(),
    }
}

impl PipelineConfig {
    /// Parses config text; relative paths stay relative.
    pub fn parse(text: &str) -> Result<Self> {
        let mut seen = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if seen.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: `{key}` set twice", n + 1)));
            }
        }
        let mut cfg = PipelineConfig::default();
        for (key, value) in &seen {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = PipelineConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        if cfg.input.is_relative() {
            cfg.input = base.join(&cfg.input);
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// Applies one assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value;
        match key {
            "io.input" => self.input = PathBuf::from(v),
            "io.column" => self.column = v.to_string(),
            "io.output_dir" => self.output_dir = PathBuf::from(v),
            "pipeline.seed" => self.seed = parse_value(key, v)?,
            "pipeline.variant" => self.variant = v.parse()?,
            "pipeline.train_frac" => self.split.train_frac = parse_value(key, v)?,
            "pipeline.val_frac" => self.split.val_frac = parse_value(key, v)?,
            "pipeline.outlier_std" => {
                self.outlier_std = if v == "none" { None } else { Some(parse_value(key, v)?) }
            }
            "pipeline.trace" => self.trace = parse_value(key, v)?,
            "svmd.alpha" => self.svmd.alpha = parse_value(key, v)?,
            "svmd.tau" => self.svmd.tau = parse_value(key, v)?,
            "svmd.inner_tol" => self.svmd.inner_tol = parse_value(key, v)?,
            "svmd.max_inner_iters" => self.svmd.max_inner_iters = parse_value(key, v)?,
            "svmd.max_modes" => self.svmd.max_modes = parse_value(key, v)?,
            "svmd.residual_energy_ratio" => self.svmd.residual_energy_ratio = parse_value(key, v)?,
            "ebqpso.population" => self.ebqpso.population = parse_value(key, v)?,
            "ebqpso.generations" => self.ebqpso.generations = parse_value(key, v)?,
            "ebqpso.jumping_rate" => self.ebqpso.jumping_rate = parse_value(key, v)?,
            "ebqpso.transposon_count" => self.ebqpso.transposon_count = parse_value(key, v)?,
            "ebqpso.transposon_size" => self.ebqpso.transposon_size = parse_value(key, v)?,
            "ebqpso.lambda" => self.ebqpso.lambda = parse_value(key, v)?,
            "ebqpso.ce_mode" => self.ebqpso.ce_mode = parse_ce(v)?,
            "ebqpso.gamma_min" => self.bounds.gamma.0 = parse_value(key, v)?,
            "ebqpso.gamma_max" => self.bounds.gamma.1 = parse_value(key, v)?,
            "ebqpso.sigma2_min" => self.bounds.sigma2.0 = parse_value(key, v)?,
            "ebqpso.sigma2_max" => self.bounds.sigma2.1 = parse_value(key, v)?,
            "ebqpso.window_min" => self.bounds.window.0 = parse_value(key, v)?,
            "ebqpso.window_max" => self.bounds.window.1 = parse_value(key, v)?,
            "lstm.hidden_size" => self.lstm.hidden_size = parse_value(key, v)?,
            "lstm.window" => self.lstm.window = parse_value(key, v)?,
            "lstm.learning_rate" => self.lstm.learning_rate = parse_value(key, v)?,
            "lstm.epochs" => self.lstm.epochs = parse_value(key, v)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidInput(m) => Error::Config(m),
            other => other,
        };
        if self.column.is_empty() {
            return Err(Error::Config("io.column is empty".into()));
        }
        self.split.validate().map_err(wrap)?;
        if let Some(k) = self.outlier_std {
            if !(k > 0.0) {
                return Err(Error::Config("pipeline.outlier_std must be positive or `none`".into()));
            }
        }
        self.svmd.validate().map_err(wrap)?;
        self.ebqpso.validate(3).map_err(wrap)?;
        self.bounds.space().map_err(wrap)?;
        self.lstm.validate().map_err(wrap)?;
        Ok(())
    }

    /// Every setting as `key = value` lines in a fixed order. Parsing this
    /// text yields the same configuration.
    pub fn to_text(&self) -> String {
        let mut lines = vec![
            format!("io.input = {}", self.input.display()),
            format!("io.column = {}", self.column),
            format!("io.output_dir = {}", self.output_dir.display()),
        ];
        lines.extend(self.model_lines());
        lines.join("\n") + "\n"
    }

    /// Settings that influence results; paths excluded.
    fn model_lines(&self) -> Vec<String> {
        let e = &self.ebqpso;
        vec![
            format!("pipeline.seed = {}", self.seed),
            format!("pipeline.variant = {}", self.variant),
            format!("pipeline.train_frac = {}", self.split.train_frac),
            format!("pipeline.val_frac = {}", self.split.val_frac),
            format!(
                "pipeline.outlier_std = {}",
                self.outlier_std.map_or("none".to_string(), |k| k.to_string())
            ),
            format!("pipeline.trace = {}", self.trace),
            format!("svmd.alpha = {}", self.svmd.alpha),
            format!("svmd.tau = {}", self.svmd.tau),
            format!("svmd.inner_tol = {}", self.svmd.inner_tol),
            format!("svmd.max_inner_iters = {}", self.svmd.max_inner_iters),
            format!("svmd.max_modes = {}", self.svmd.max_modes),
            format!("svmd.residual_energy_ratio = {}", self.svmd.residual_energy_ratio),
            format!("ebqpso.population = {}", e.population),
            format!("ebqpso.generations = {}", e.generations),
            format!("ebqpso.jumping_rate = {}", e.jumping_rate),
            format!("ebqpso.transposon_count = {}", e.transposon_count),
            format!("ebqpso.transposon_size = {}", e.transposon_size),
            format!("ebqpso.lambda = {}", e.lambda),
            format!("ebqpso.ce_mode = {}", format_ce(e.ce_mode)),
            format!("ebqpso.gamma_min = {}", self.bounds.gamma.0),
            format!("ebqpso.gamma_max = {}", self.bounds.gamma.1),
            format!("ebqpso.sigma2_min = {}", self.bounds.sigma2.0),
            format!("ebqpso.sigma2_max = {}", self.bounds.sigma2.1),
            format!("ebqpso.window_min = {}", self.bounds.window.0),
            format!("ebqpso.window_max = {}", self.bounds.window.1),
            format!("lstm.hidden_size = {}", self.lstm.hidden_size),
            format!("lstm.window = {}", self.lstm.window),
            format!("lstm.learning_rate = {}", self.lstm.learning_rate),
            format!("lstm.epochs = {}", self.lstm.epochs),
        ]
    }

    /// SHA-256 over the result-relevant settings (hex). Input and output
    /// paths are left out so relocating files keeps the digest.
    pub fn digest(&self) -> String {
        let text = self.model_lines().join("\n");
        Sha256::digest(text.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
