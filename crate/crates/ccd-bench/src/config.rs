//! Experiment configuration: one TOML tree, flag overrides on top (flags
//! win). See the repository README for the schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use ccd_core::models::cubic::SpectrumSpec;
use ccd_core::AssertLevel;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("io ({path}): {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error("{0}")]
    Invalid(String),
}

/// Named solver presets. The trailing digit picks the smooth-part stepsize:
/// `-1` uses the aggressive multiplier `c = 0.51`, `-2` uses `c = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Prox method, random blocks, one coordinate per block.
    #[serde(rename = "RCPG")]
    Rcpg,
    #[serde(rename = "RCGD-1")]
    Rcgd1,
    #[serde(rename = "RCGD-2")]
    Rcgd2,
    /// Prox method, cyclic blocks.
    #[serde(rename = "CCPG")]
    Ccpg,
    #[serde(rename = "CCGD-1")]
    Ccgd1,
    #[serde(rename = "CCGD-2")]
    Ccgd2,
    /// Full-vector gradient method (one block).
    #[serde(rename = "GD-1")]
    Gd1,
    #[serde(rename = "GD-2")]
    Gd2,
}

pub const ALL_VARIANTS: [Variant; 8] = [
    Variant::Rcpg,
    Variant::Rcgd1,
    Variant::Rcgd2,
    Variant::Ccpg,
    Variant::Ccgd1,
    Variant::Ccgd2,
    Variant::Gd1,
    Variant::Gd2,
];

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Rcpg => "RCPG",
            Variant::Rcgd1 => "RCGD-1",
            Variant::Rcgd2 => "RCGD-2",
            Variant::Ccpg => "CCPG",
            Variant::Ccgd1 => "CCGD-1",
            Variant::Ccgd2 => "CCGD-2",
            Variant::Gd1 => "GD-1",
            Variant::Gd2 => "GD-2",
        }
    }

    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        ALL_VARIANTS
            .iter()
            .find(|v| v.name().eq_ignore_ascii_case(s))
            .copied()
            .ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "unknown variant '{s}' (expected one of {})",
                    ALL_VARIANTS.map(|v| v.name()).join(", ")
                ))
            })
    }

    /// Random block selection (needs a seed list).
    pub fn is_random(&self) -> bool {
        matches!(self, Variant::Rcpg | Variant::Rcgd1 | Variant::Rcgd2)
    }

    /// Prox-method preset.
    pub fn is_prox(&self) -> bool {
        matches!(self, Variant::Rcpg | Variant::Ccpg)
    }

    /// Single-block (full-vector) preset.
    pub fn is_single_block(&self) -> bool {
        matches!(self, Variant::Gd1 | Variant::Gd2)
    }

    /// Smooth-part stepsize multiplier `c` with `H_f = c L_i`.
    pub fn multiplier(&self) -> f64 {
        match self {
            Variant::Rcgd1 | Variant::Ccgd1 | Variant::Gd1 => 0.51,
            _ => 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpectrumConfig {
    GapLargest { largest: f64 },
    Indefinite { lambda_min: f64 },
    Explicit { values: Vec<f64> },
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig::GapLargest { largest: 1e4 }
    }
}

impl SpectrumConfig {
    pub fn to_spec(&self) -> SpectrumSpec {
        match self {
            SpectrumConfig::GapLargest { largest } => SpectrumSpec::GapLargest { largest: *largest },
            SpectrumConfig::Indefinite { lambda_min } => SpectrumSpec::Indefinite {
                lambda_min: *lambda_min,
            },
            SpectrumConfig::Explicit { values } => SpectrumSpec::Explicit(values.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LinearTermConfig {
    #[default]
    Gaussian,
    Zero,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    /// `0.5 <Ax,x> + <b,x> + (m_reg/6)||x||^3` over a generated or loaded
    /// symmetric matrix.
    CubicNewton {
        #[serde(default)]
        n: Option<usize>,
        m_reg: f64,
        #[serde(default)]
        spectrum: SpectrumConfig,
        #[serde(default)]
        b: LinearTermConfig,
        #[serde(default)]
        matrix_file: Option<PathBuf>,
        #[serde(default)]
        instance_seed: u64,
    },
    /// Smallest-eigenvalue mode: the cubic model with `b = 0`.
    Eigen {
        #[serde(default)]
        n: Option<usize>,
        m_reg: f64,
        #[serde(default = "default_lambda_min")]
        lambda_min: f64,
        #[serde(default)]
        matrix_file: Option<PathBuf>,
        #[serde(default)]
        instance_seed: u64,
    },
    /// Penalized orthogonal matrix factorization.
    Mf {
        m: usize,
        n: usize,
        r: usize,
        lambda: f64,
        #[serde(default = "default_noise")]
        noise: f64,
        #[serde(default)]
        data_file: Option<PathBuf>,
        #[serde(default)]
        instance_seed: u64,
    },
}

fn default_lambda_min() -> f64 {
    -5.0
}

fn default_noise() -> f64 {
    1e-3
}

impl ModelConfig {
    pub fn kind_name(&self) -> &'static str {
        match self {
            ModelConfig::CubicNewton { .. } => "cubic_newton",
            ModelConfig::Eigen { .. } => "eigen",
            ModelConfig::Mf { .. } => "mf",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, Default, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    pub grad_tol: Option<f64>,
    pub max_iters: Option<u64>,
    pub max_wall: Option<f64>,
    pub assert_level: Option<String>,
    pub grad_check_every: Option<u64>,
    pub record_every: Option<u64>,
}

impl SolverOverrides {
    pub fn assert_level(&self) -> Result<Option<AssertLevel>, ConfigError> {
        match self.assert_level.as_deref() {
            None => Ok(None),
            Some("off") => Ok(Some(AssertLevel::Off)),
            Some("descent") => Ok(Some(AssertLevel::DescentOnly)),
            Some("full") => Ok(Some(AssertLevel::Full)),
            Some(other) => Err(ConfigError::Invalid(format!(
                "solver.assert_level: unknown level '{other}' (off | descent | full)"
            ))),
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("ccd-out")
}

fn default_jobs() -> usize {
    1
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub solver: SolverOverrides,
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_jobs")]
    pub jobs: usize,
    /// Also write one JSON trace per run next to the CSV.
    #[serde(default)]
    pub emit_json: bool,
}

impl ExperimentConfig {
    /// Structural validation beyond what serde enforces.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.variants.is_empty() {
            return Err(ConfigError::Invalid(
                "variants: at least one variant is required".into(),
            ));
        }
        if self.seeds.is_empty() && self.variants.iter().any(|v| v.is_random()) {
            return Err(ConfigError::Invalid(
                "seeds: seeds required for random variants".into(),
            ));
        }
        self.solver.assert_level()?;
        match &self.model {
            ModelConfig::CubicNewton {
                n,
                m_reg,
                matrix_file,
                spectrum,
                ..
            } => {
                if !(m_reg.is_finite() && *m_reg > 0.0) {
                    return Err(ConfigError::Invalid(
                        "model.m_reg: must be positive".into(),
                    ));
                }
                if matrix_file.is_none() && n.is_none() {
                    return Err(ConfigError::Invalid(
                        "model.n: required unless matrix_file is given".into(),
                    ));
                }
                if let (Some(n), SpectrumConfig::Explicit { values }) = (n, spectrum) {
                    if values.len() != *n {
                        return Err(ConfigError::Invalid(format!(
                            "model.spectrum.values: {} values for n = {n}",
                            values.len()
                        )));
                    }
                }
            }
            ModelConfig::Eigen {
                n,
                m_reg,
                matrix_file,
                ..
            } => {
                if !(m_reg.is_finite() && *m_reg > 0.0) {
                    return Err(ConfigError::Invalid(
                        "model.m_reg: must be positive".into(),
                    ));
                }
                if matrix_file.is_none() && n.is_none() {
                    return Err(ConfigError::Invalid(
                        "model.n: required unless matrix_file is given".into(),
                    ));
                }
                if self.variants.iter().any(|v| v.is_single_block()) && matrix_file.is_some() {
                    return Err(ConfigError::Invalid(
                        "variants: GD presets need a dense (generated) matrix".into(),
                    ));
                }
            }
            ModelConfig::Mf { lambda, .. } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(ConfigError::Invalid(
                        "model.lambda: must be nonnegative".into(),
                    ));
                }
                for v in &self.variants {
                    if v.is_prox() || v.is_single_block() {
                        return Err(ConfigError::Invalid(format!(
                            "variants: {} is not applicable to the mf model \
                             (the penalty has no block prox; use CCGD/RCGD presets)",
                            v.name()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Parse a TOML experiment file and validate it.
pub fn parse_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let cfg: ExperimentConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
        path: path.to_path_buf(),
        msg: e.to_string(),
    })?;
    cfg.validate()?;
    Ok(cfg)
}

/// Command-line overrides; `None` keeps the file value. Flags win.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
    pub grad_tol: Option<f64>,
    pub max_iters: Option<u64>,
    pub max_wall: Option<f64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn apply_overrides(cfg: &mut ExperimentConfig, o: &Overrides) -> Result<(), ConfigError> {
    if let Some(v) = o.variant {
        cfg.variants = vec![v];
    }
    if let Some(s) = o.seed {
        cfg.seeds = vec![s];
    }
    if let Some(g) = o.grad_tol {
        cfg.solver.grad_tol = Some(g);
    }
    if let Some(m) = o.max_iters {
        cfg.solver.max_iters = Some(m);
    }
    if let Some(w) = o.max_wall {
        cfg.solver.max_wall = Some(w);
    }
    if let Some(j) = o.jobs {
        cfg.jobs = j;
    }
    if let Some(out) = &o.out {
        cfg.output_dir = out.clone();
    }
    cfg.validate()
}
