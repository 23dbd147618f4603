use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use deepie_core::generator::{Canvas, Shape};
use deepie_core::{load_model, Generator, GeneratorError};
use serde::Serialize;

pub const PROCEDURAL_ID: &str = "procedural";

#[derive(Clone, Debug)]
pub struct ModelEntry {
    pub id: String,
    pub generator: Generator,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct ModelInfo {
    pub id: String,
    pub kind: &'static str,
    /// `None` for the procedural model, which accepts any latent length of six or more.
    pub latent_dim: Option<usize>,
    pub output: Shape,
}

/// Registered generators by id. The procedural model is always present.
#[derive(Clone, Debug)]
pub struct ModelRegistry {
    models: BTreeMap<String, ModelEntry>,
}

#[derive(Debug, thiserror::Error)]
pub enum RegistryError {
    #[error("reading {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("loading {path}: {source}")]
    Load { path: String, source: GeneratorError },
}

impl ModelRegistry {
    pub fn new(canvas: Canvas) -> Self {
        let mut models = BTreeMap::new();
        models.insert(
            PROCEDURAL_ID.to_owned(),
            ModelEntry { id: PROCEDURAL_ID.to_owned(), generator: Generator::Procedural(canvas) },
        );
        Self { models }
    }

    pub fn insert(&mut self, id: impl Into<String>, generator: Generator) {
        let id = id.into();
        self.models.insert(id.clone(), ModelEntry { id, generator });
    }

    /// Loads every `*.diew` file in `dir`, keyed by file stem.
    pub fn load_dir(&mut self, dir: &Path) -> Result<usize, RegistryError> {
        let io = |source| RegistryError::Io { path: dir.display().to_string(), source };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|ext| ext == "diew"))
            .collect();
        paths.sort();
        for path in &paths {
            let shown = path.display().to_string();
            let bytes = std::fs::read(path).map_err(|source| RegistryError::Io { path: shown.clone(), source })?;
            let model = load_model(&bytes).map_err(|source| RegistryError::Load { path: shown.clone(), source })?;
            let id = path.file_stem().unwrap_or_default().to_string_lossy().into_owned();
            self.insert(id, Generator::Neural(Arc::new(model)));
        }
        Ok(paths.len())
    }

    pub fn get(&self, id: &str) -> Option<&ModelEntry> {
        self.models.get(id)
    }

    pub fn list(&self) -> Vec<ModelInfo> {
        self.models
            .values()
            .map(|e| ModelInfo {
                id: e.id.clone(),
                kind: match e.generator {
                    Generator::Neural(_) => "neural",
                    Generator::Procedural(_) => "procedural",
                },
                latent_dim: e.generator.latent_dim(),
                output: e.generator.output_shape(),
            })
            .collect()
    }
}
