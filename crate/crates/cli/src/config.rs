//! Experiment configuration: a single TOML file with strict keys.
//!
//! Unknown keys are rejected so typos fail loudly. Command-line flags
//! (`--seed`, `--mode`, `--workers`) override the corresponding fields; the
//! fully resolved configuration is embedded in every output sidecar, and a
//! sidecar JSON can itself be passed as `--config` to reproduce the artifact.

use aggfield::quad::QuadratureConfig;
use aggfield::theta::{PhiSpec, SupportSign, ThetaLaw, ThetaLawError};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LawConfig {
    pub alpha: f64,
    pub phi: PhiSpec,
    pub support: SupportSign,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub n1: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectralMode {
    Grid,
    Line,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Raw,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub mode: SpectralMode,
    pub format: OutputFormat,
    /// Adds asymptote and ratio columns; only meaningful for `0 < alpha <= 1`.
    pub with_asymptote: bool,
    /// Line mode: evaluate along `lambda = (t, t)` for `points` log-spaced
    /// values from `t_start` down to `t_stop`.
    pub t_start: f64,
    pub t_stop: f64,
    pub points: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            mode: SpectralMode::Grid,
            format: OutputFormat::Csv,
            with_asymptote: false,
            t_start: 1e-1,
            t_stop: 1e-4,
            points: 13,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimulateMode {
    Single,
    Aggregate,
    Limit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub mode: SimulateMode,
    /// AR coefficient for `single` mode.
    pub theta: Option<f64>,
    /// Number of aggregated replicates for `aggregate` mode.
    pub n_fields: Option<u64>,
    /// How many independent realizations to write (seed offsets 0..replicates).
    pub replicates: u64,
    pub format: OutputFormat,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            mode: SimulateMode::Limit,
            theta: None,
            n_fields: None,
            replicates: 1,
            format: OutputFormat::Raw,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalyzeConfig {
    /// Input field files (`.f64` with sidecars); may be supplied on the
    /// command line instead.
    pub inputs: Vec<String>,
    pub n_bins: usize,
    /// Fit range in `|lambda|`; defaults to `[4 * 2pi/max(n1,n2), 0.5]`.
    pub fit_min: Option<f64>,
    pub fit_max: Option<f64>,
}

impl Default for AnalyzeConfig {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            n_bins: 64,
            fit_min: None,
            fit_max: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub alphas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            alphas: vec![0.25, 0.5, 0.75, 1.0, 2.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub law: LawConfig,
    pub sigma2_eps: f64,
    pub lattice: LatticeConfig,
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub simulate: SimulateConfig,
    #[serde(default)]
    pub analyze: AnalyzeConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Debug)]
pub enum ConfigError {
    /// Parse or semantic validation problem: exit code 2.
    Invalid(String),
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConfigError::Invalid(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for ConfigError {}

impl ExperimentConfig {
    /// Loads a TOML config, or extracts the embedded config from a sidecar
    /// JSON produced by an earlier run.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            ConfigError::Invalid(format!("cannot read config {}: {e}", path.display()))
        })?;
        if path.extension().is_some_and(|e| e == "json") {
            let value: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))?;
            let embedded = value.get("config").cloned().unwrap_or(value);
            serde_json::from_value(embedded)
                .map_err(|e| ConfigError::Invalid(format!("{}: embedded config: {e}", path.display())))
        } else {
            toml::from_str(&text)
                .map_err(|e| ConfigError::Invalid(format!("{}: {e}", path.display())))
        }
    }

    /// Semantic validation with messages that name the offending field and
    /// its bound.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.law.alpha > -1.0) {
            return Err(ConfigError::Invalid(format!(
                "law.alpha = {} is invalid: the exponent must exceed -1",
                self.law.alpha
            )));
        }
        if !(self.sigma2_eps > 0.0) {
            return Err(ConfigError::Invalid(format!(
                "sigma2_eps = {} is invalid: the noise variance must be positive",
                self.sigma2_eps
            )));
        }
        if self.lattice.n1 < 2 || self.lattice.n2 < 2 {
            return Err(ConfigError::Invalid(format!(
                "lattice {}x{} is invalid: both dimensions must be at least 2",
                self.lattice.n1, self.lattice.n2
            )));
        }
        self.quadrature
            .validate()
            .map_err(|m| ConfigError::Invalid(format!("quadrature: {m}")))?;
        if self.spectral.mode == SpectralMode::Line {
            if !(self.spectral.t_start > self.spectral.t_stop && self.spectral.t_stop > 0.0) {
                return Err(ConfigError::Invalid(format!(
                    "spectral line range needs t_start > t_stop > 0, got {} .. {}",
                    self.spectral.t_start, self.spectral.t_stop
                )));
            }
            if self.spectral.t_start > std::f64::consts::PI {
                return Err(ConfigError::Invalid(format!(
                    "spectral.t_start = {} exceeds pi; frequencies live in [-pi, pi]",
                    self.spectral.t_start
                )));
            }
            if self.spectral.points < 2 {
                return Err(ConfigError::Invalid(
                    "spectral.points must be at least 2".into(),
                ));
            }
        }
        if self.spectral.with_asymptote && !(self.law.alpha > 0.0 && self.law.alpha <= 1.0) {
            return Err(ConfigError::Invalid(format!(
                "spectral.with_asymptote requires 0 < alpha <= 1 (the long-memory \
                 regimes); alpha = {} has no asymptote column",
                self.law.alpha
            )));
        }
        match self.simulate.mode {
            SimulateMode::Single => {
                let theta = self.simulate.theta.ok_or_else(|| {
                    ConfigError::Invalid("simulate.mode = \"single\" requires simulate.theta".into())
                })?;
                if !(theta.abs() < 0.25) {
                    return Err(ConfigError::Invalid(format!(
                        "simulate.theta = {theta} admits no stationary solution: \
                         |theta| must be strictly below 1/4"
                    )));
                }
            }
            SimulateMode::Aggregate => {
                let n = self.simulate.n_fields.ok_or_else(|| {
                    ConfigError::Invalid(
                        "simulate.mode = \"aggregate\" requires simulate.n_fields".into(),
                    )
                })?;
                if n == 0 {
                    return Err(ConfigError::Invalid(
                        "simulate.n_fields must be at least 1".into(),
                    ));
                }
            }
            SimulateMode::Limit => {
                if self.law.alpha <= 0.0 {
                    return Err(ConfigError::Invalid(format!(
                        "simulate.mode = \"limit\" requires law.alpha > 0 (L2 existence); \
                         got alpha = {}",
                        self.law.alpha
                    )));
                }
            }
        }
        if self.simulate.replicates == 0 {
            return Err(ConfigError::Invalid(
                "simulate.replicates must be at least 1".into(),
            ));
        }
        if self.analyze.n_bins < 2 {
            return Err(ConfigError::Invalid(
                "analyze.n_bins must be at least 2".into(),
            ));
        }
        Ok(())
    }

    pub fn build_law(&self) -> Result<ThetaLaw, ThetaLawError> {
        ThetaLaw::new(
            self.law.alpha,
            self.law.phi.clone(),
            self.law.support,
            &self.quadrature,
        )
    }

}
