//! Server configuration: TOML file, then `DEEPIE_*` environment variables, then command-line flags.

use std::path::{Path, PathBuf};

use deepie_core::{Canvas, EvolutionParams};
use serde::{Deserialize, Serialize};

use crate::store::ParamsOverride;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub listen: String,
    pub model_dir: Option<PathBuf>,
    pub log_dir: Option<PathBuf>,
    /// Canvas of the built-in procedural model.
    pub procedural_canvas: Canvas,
    pub params: ParamsOverride,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            model_dir: None,
            log_dir: None,
            procedural_canvas: Canvas::default(),
            params: ParamsOverride::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("parsing {path}: {source}")]
    Parse { path: String, source: toml::de::Error },
}

/// Values given on the command line; `None` leaves the lower layers in place.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub listen: Option<String>,
    pub model_dir: Option<PathBuf>,
    pub log_dir: Option<PathBuf>,
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: shown.clone(), source })?;
        toml::from_str(&text).map_err(|source| ConfigError::Parse { path: shown, source })
    }

    /// Applies `DEEPIE_LISTEN`, `DEEPIE_MODEL_DIR` and `DEEPIE_LOG_DIR` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) {
        if let Some(v) = lookup("DEEPIE_LISTEN") {
            self.listen = v;
        }
        if let Some(v) = lookup("DEEPIE_MODEL_DIR") {
            self.model_dir = Some(v.into());
        }
        if let Some(v) = lookup("DEEPIE_LOG_DIR") {
            self.log_dir = Some(v.into());
        }
    }

    pub fn apply_flags(&mut self, flags: Overrides) {
        if let Some(v) = flags.listen {
            self.listen = v;
        }
        if flags.model_dir.is_some() {
            self.model_dir = flags.model_dir;
        }
        if flags.log_dir.is_some() {
            self.log_dir = flags.log_dir;
        }
    }

    /// File (if any), then environment, then flags.
    pub fn resolve(
        file: Option<&Path>,
        lookup: impl Fn(&str) -> Option<String>,
        flags: Overrides,
    ) -> Result<Self, ConfigError> {
        let mut config = match file {
            Some(path) => Self::from_file(path)?,
            None => Self::default(),
        };
        config.apply_env(lookup);
        config.apply_flags(flags);
        Ok(config)
    }

    pub fn default_params(&self) -> EvolutionParams {
        self.params.apply(EvolutionParams::default())
    }
}
