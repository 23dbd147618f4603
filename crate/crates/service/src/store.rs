use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use deepie_core::{EvolutionParams, LatentVector};
use serde::{Deserialize, Serialize};

use crate::error::{RestoreError, SessionError};
use crate::registry::ModelRegistry;
use crate::session::{Session, SessionStatus};

/// Partial parameter set accepted on session creation; missing fields take the store defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsOverride {
    pub m: Option<usize>,
    pub n: Option<usize>,
    pub mu: Option<f64>,
    pub sigma2: Option<f64>,
    pub p: Option<f64>,
    pub foreign: Option<usize>,
}

impl ParamsOverride {
    pub fn apply(&self, base: EvolutionParams) -> EvolutionParams {
        EvolutionParams {
            m: self.m.unwrap_or(base.m),
            n: self.n.unwrap_or(base.n),
            mu: self.mu.unwrap_or(base.mu),
            sigma2: self.sigma2.unwrap_or(base.sigma2),
            p: self.p.unwrap_or(base.p),
            foreign: self.foreign.unwrap_or(base.foreign),
        }
    }
}

struct Slot {
    session: Session,
    /// Log records already written to disk.
    persisted: usize,
}

/// All live sessions. Transitions on one session are serialized by its mutex;
/// distinct sessions proceed independently.
pub struct SessionStore {
    registry: Arc<ModelRegistry>,
    defaults: EvolutionParams,
    log_dir: Option<PathBuf>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
}

pub fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
}

impl SessionStore {
    pub fn new(registry: Arc<ModelRegistry>, defaults: EvolutionParams, log_dir: Option<PathBuf>) -> Self {
        Self { registry, defaults, log_dir, sessions: RwLock::new(HashMap::new()) }
    }

    pub fn registry(&self) -> &ModelRegistry {
        &self.registry
    }

    pub fn log_path(&self, id: &str) -> Option<PathBuf> {
        self.log_dir.as_ref().map(|dir| dir.join(format!("{id}.jsonl")))
    }

    /// Replays every `*.jsonl` log in the log directory.
    pub fn restore_all(&self) -> Result<usize, (PathBuf, RestoreError)> {
        let Some(dir) = &self.log_dir else { return Ok(0) };
        let mut paths: Vec<PathBuf> = match std::fs::read_dir(dir) {
            Ok(entries) => entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "jsonl"))
                .collect(),
            Err(_) => return Ok(0),
        };
        paths.sort();
        for path in &paths {
            let session = restore_file(path, &self.registry).map_err(|e| (path.clone(), e))?;
            let persisted = session.log().len();
            self.insert(Slot { session, persisted });
        }
        Ok(paths.len())
    }

    pub fn create(
        &self,
        model_id: &str,
        params: Option<ParamsOverride>,
        seed: Option<u64>,
    ) -> Result<String, SessionError> {
        let entry = self.registry.get(model_id).ok_or_else(|| SessionError::UnknownModel(model_id.to_owned()))?;
        let mut base = self.defaults;
        if let Some(dim) = entry.generator.latent_dim() {
            base.n = dim;
        }
        let params = params.unwrap_or_default().apply(base);
        let id = format!("{:032x}", rand::random::<u128>());
        let seed = seed.unwrap_or_else(rand::random);
        let session = Session::create(&self.registry, id.clone(), model_id, params, seed, now_ms())?;
        let mut slot = Slot { session, persisted: 0 };
        self.flush(&mut slot)?;
        self.insert(slot);
        Ok(id)
    }

    pub fn ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self.sessions.read().expect("store lock").keys().cloned().collect();
        ids.sort();
        ids
    }

    /// Read-only access to one session.
    pub fn read<R>(&self, id: &str, f: impl FnOnce(&Session) -> R) -> Result<R, SessionError> {
        let slot = self.slot(id)?;
        let guard = slot.lock().expect("session lock");
        Ok(f(&guard.session))
    }

    /// Runs a transition and appends any new log records to disk.
    pub fn update<R>(
        &self,
        id: &str,
        f: impl FnOnce(&mut Session) -> Result<R, SessionError>,
    ) -> Result<R, SessionError> {
        let slot = self.slot(id)?;
        let mut guard = slot.lock().expect("session lock");
        let out = f(&mut guard.session)?;
        self.flush(&mut guard)?;
        Ok(out)
    }

    /// Latents of the current generation, in member order. Requires an active session.
    pub fn current_latents(&self, id: &str) -> Result<(String, u64, Vec<LatentVector>), SessionError> {
        self.read(id, |s| {
            s.require_status(SessionStatus::Active)?;
            Ok((s.model_id().to_owned(), s.generation(), s.population().latents().cloned().collect()))
        })?
    }

    /// Latents of the review set in shuffled order, plus the pick if made.
    pub fn review_latents(&self, id: &str) -> Result<(String, Vec<LatentVector>, Option<usize>), SessionError> {
        self.read(id, |s| {
            let review = s.review().ok_or(SessionError::WrongStatus {
                required: SessionStatus::Reviewing,
                actual: s.status(),
            })?;
            let latents = review
                .entries
                .iter()
                .map(|e| s.member(e.generation, e.member_index).expect("review entries point into history").values.clone())
                .collect();
            Ok((s.model_id().to_owned(), latents, review.pick))
        })?
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, SessionError> {
        self.sessions
            .read()
            .expect("store lock")
            .get(id)
            .cloned()
            .ok_or_else(|| SessionError::UnknownSession(id.to_owned()))
    }

    fn insert(&self, slot: Slot) {
        let id = slot.session.id().to_owned();
        self.sessions.write().expect("store lock").insert(id, Arc::new(Mutex::new(slot)));
    }

    fn flush(&self, slot: &mut Slot) -> Result<(), SessionError> {
        let pending = &slot.session.log()[slot.persisted..];
        if pending.is_empty() {
            return Ok(());
        }
        if let Some(path) = self.log_path(slot.session.id()) {
            let mut file = OpenOptions::new().create(true).append(true).open(path)?;
            let mut buf = Vec::new();
            for record in pending {
                serde_json::to_writer(&mut buf, record).map_err(std::io::Error::other)?;
                buf.push(b'\n');
            }
            file.write_all(&buf)?;
        }
        slot.persisted = slot.session.log().len();
        Ok(())
    }
}

pub fn restore_file(path: &Path, registry: &ModelRegistry) -> Result<Session, RestoreError> {
    let file = File::open(path).map_err(|e| RestoreError { line: 0, reason: e.to_string() })?;
    Session::restore(BufReader::new(file), registry)
}
