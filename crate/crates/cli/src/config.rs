//! Run configuration with the precedence: CLI flags > config file > defaults.
//!
//! The config file is TOML; its path comes from the `CARA_KIT_CONFIG`
//! environment variable. Every key is optional.

use serde::{Deserialize, Serialize};
use std::path::PathBuf;
use thiserror::Error;

/// Environment variable naming the config file.
pub const CONFIG_ENV_VAR: &str = "CARA_KIT_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {source}")]
    Parse {
        path: String,
        #[source]
        source: toml::de::Error,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Resolved run configuration, echoed verbatim into every report.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    /// Radius refinement steps of the scan grid.
    pub grid_j: usize,
    /// Angles per circle of the scan grid.
    pub grid_m: usize,
    /// Outermost grid radius.
    pub r_max: f64,
    /// Tie band for holds/violated verdicts (dimensionless slack).
    pub slack_tol: f64,
    /// Convergence tolerance for fixed-point products.
    pub fixed_point_tol: f64,
    /// Rotations sampled by the rotation sweep.
    pub lambda_samples: usize,
    /// Compact radius for fixed-point work.
    pub fixed_point_radius: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid_j: 40,
            grid_m: 64,
            r_max: 1.0 - (2.0f64).powi(-10),
            slack_tol: 1e-12,
            fixed_point_tol: 1e-10,
            lambda_samples: 360,
            fixed_point_radius: 0.8,
            out: None,
            format: OutputFormat::Json,
        }
    }
}

/// Optional keys accepted in the TOML config file.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub grid_j: Option<usize>,
    pub grid_m: Option<usize>,
    pub r_max: Option<f64>,
    pub slack_tol: Option<f64>,
    pub fixed_point_tol: Option<f64>,
    pub lambda_samples: Option<usize>,
    pub fixed_point_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

/// Per-invocation overrides collected from CLI flags.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub grid_j: Option<usize>,
    pub grid_m: Option<usize>,
    pub r_max: Option<f64>,
    pub tol: Option<f64>,
    pub lambda_samples: Option<usize>,
    pub fixed_point_radius: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl RunConfig {
    /// Defaults, overlaid by the `CARA_KIT_CONFIG` file if set, overlaid by
    /// CLI flags.
    pub fn resolve(overrides: &Overrides) -> Result<RunConfig, ConfigError> {
        let file = match std::env::var_os(CONFIG_ENV_VAR) {
            Some(path) => {
                let path = PathBuf::from(path);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                toml::from_str::<ConfigFile>(&text).map_err(|source| ConfigError::Parse {
                    path: path.display().to_string(),
                    source,
                })?
            }
            None => ConfigFile::default(),
        };
        let defaults = RunConfig::default();
        let config = RunConfig {
            grid_j: overrides.grid_j.or(file.grid_j).unwrap_or(defaults.grid_j),
            grid_m: overrides.grid_m.or(file.grid_m).unwrap_or(defaults.grid_m),
            r_max: overrides.r_max.or(file.r_max).unwrap_or(defaults.r_max),
            slack_tol: file.slack_tol.unwrap_or(defaults.slack_tol),
            fixed_point_tol: overrides
                .tol
                .or(file.fixed_point_tol)
                .unwrap_or(defaults.fixed_point_tol),
            lambda_samples: overrides
                .lambda_samples
                .or(file.lambda_samples)
                .unwrap_or(defaults.lambda_samples),
            fixed_point_radius: overrides
                .fixed_point_radius
                .or(file.fixed_point_radius)
                .unwrap_or(defaults.fixed_point_radius),
            out: overrides.out.clone().or(file.out),
            format: overrides.format.or(file.format).unwrap_or(defaults.format),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_j == 0 || self.grid_m == 0 {
            return Err(ConfigError::Invalid("grid_j and grid_m must be >= 1".into()));
        }
        if !(self.r_max > 0.0 && self.r_max < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "r_max = {} must lie in (0, 1)",
                self.r_max
            )));
        }
        if self.slack_tol <= 0.0 || self.fixed_point_tol <= 0.0 {
            return Err(ConfigError::Invalid("tolerances must be positive".into()));
        }
        if !(self.fixed_point_radius > 0.0 && self.fixed_point_radius < 1.0) {
            return Err(ConfigError::Invalid(format!(
                "fixed-point radius = {} must lie in (0, 1)",
                self.fixed_point_radius
            )));
        }
        if self.lambda_samples == 0 {
            return Err(ConfigError::Invalid("lambda_samples must be >= 1".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<cara_core::DiskGrid, ConfigError> {
        cara_core::DiskGrid::new(self.grid_j, self.grid_m, self.r_max)
            .map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}
