use std::path::PathBuf;
use std::sync::Arc;

use anyhow::Context;
use clap::Parser;
use deepie_service::config::{Config, Overrides};
use deepie_service::{http, ModelRegistry, SessionStore};
use tracing::info;

/// Serve interactive latent-evolution sessions over HTTP.
#[derive(Debug, Parser)]
#[command(name = "deepie-server", version)]
struct Args {
    /// TOML config file (also read from DEEPIE_CONFIG).
    #[arg(long, env = "DEEPIE_CONFIG")]
    config: Option<PathBuf>,
    /// Listen address, e.g. 127.0.0.1:8080.
    #[arg(long)]
    listen: Option<String>,
    /// Directory of *.diew weight files.
    #[arg(long)]
    model_dir: Option<PathBuf>,
    /// Directory for per-session JSON-lines logs.
    #[arg(long)]
    log_dir: Option<PathBuf>,
}

#[tokio::main]
async fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()))
        .init();

    let args = Args::parse();
    let config = Config::resolve(
        args.config.as_deref(),
        |k| std::env::var(k).ok(),
        Overrides { listen: args.listen, model_dir: args.model_dir, log_dir: args.log_dir },
    )?;

    let mut registry = ModelRegistry::new(config.procedural_canvas);
    if let Some(dir) = &config.model_dir {
        let loaded = registry.load_dir(dir)?;
        info!(count = loaded, dir = %dir.display(), "loaded weight files");
    }
    if let Some(dir) = &config.log_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let store = Arc::new(SessionStore::new(Arc::new(registry), config.default_params(), config.log_dir.clone()));
    let restored = store
        .restore_all()
        .map_err(|(path, e)| anyhow::anyhow!("restoring {}: {e}", path.display()))?;
    info!(restored, "sessions restored from logs");

    let listener = tokio::net::TcpListener::bind(&config.listen)
        .await
        .with_context(|| format!("binding {}", config.listen))?;
    info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, http::router(store))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
