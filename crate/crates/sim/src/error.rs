use std::path::PathBuf;

use deepie_core::{EvolutionError, GeneratorError};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("loading weights {path}: {source}")]
    Weights { path: PathBuf, source: GeneratorError },
    #[error("target image {path}: {source}")]
    TargetImage { path: PathBuf, source: GeneratorError },
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
    #[error("parsing results: {0}")]
    Results(#[from] serde_json::Error),
    #[error("service: {0}")]
    Service(String),
}
