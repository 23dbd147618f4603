//! Session-based HTTP service for interactive latent evolution.
//!
//! A [`Session`] holds one user's run: the current population, the full
//! lineage and an append-only transition log. [`SessionStore`] serializes
//! transitions per session and mirrors each log to a JSON-lines file, and
//! [`http::router`] exposes everything over JSON.

pub mod config;
pub mod error;
pub mod http;
pub mod log;
pub mod registry;
pub mod session;
pub mod store;

pub use config::Config;
pub use error::{RestoreError, SessionError};
pub use log::{Event, LogRecord};
pub use registry::{ModelRegistry, PROCEDURAL_ID};
pub use session::{best_iteration_ratio, GenerationRecord, ReviewEntry, ReviewSet, Session, SessionStatus};
pub use store::{ParamsOverride, SessionStore};
