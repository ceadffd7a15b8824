//! Service layer for the enriched-table engine: an HTTP+JSON API over
//! in-memory sessions, a headless script runner, and the command line.
//!
//! ```no_run
//! # async fn demo() -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
//! let config = etable_server::ServerConfig::new("academic.tgdb.json").with_process_env()?;
//! etable_server::serve(config).await?;
//! # Ok(()) }
//! ```

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod script;
pub mod store;

use std::sync::Arc;
use std::time::{Duration, Instant};

use etable_core::InstanceGraph;

pub use api::router;
pub use config::ServerConfig;
pub use error::{ApiError, ErrorEnvelope};
pub use script::{run_script, ScriptError, ScriptFormat};
pub use store::SessionStore;

/// Loads a graph file and refuses it unless it validates cleanly.
pub fn load_graph(path: &std::path::Path) -> Result<InstanceGraph, String> {
    let graph = InstanceGraph::load(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let violations = graph.validate();
    if !violations.is_empty() {
        let report: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(format!("{} failed validation:\n{}", path.display(), report.join("\n")));
    }
    Ok(graph)
}

/// Builds the session store and router for an already loaded graph.
pub fn app(graph: Arc<InstanceGraph>, config: &ServerConfig) -> (Arc<SessionStore>, axum::Router) {
    let store = Arc::new(SessionStore::new(graph, config.page_size, config.idle_timeout));
    let router = router(store.clone(), config.static_dir.as_deref());
    (store, router)
}

/// Loads the graph, binds the listener and serves until interrupted.
pub async fn serve(config: ServerConfig) -> Result<(), Box<dyn std::error::Error + Send + Sync>> {
    config.validate()?;
    let graph = Arc::new(load_graph(&config.tgdb)?);
    let (store, router) = app(graph, &config);
    if !config.idle_timeout.is_zero() {
        let sweep = (config.idle_timeout / 4).max(Duration::from_secs(1));
        tokio::spawn(async move {
            let mut tick = tokio::time::interval(sweep);
            loop {
                tick.tick().await;
                store.evict_idle(Instant::now());
            }
        });
    }
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
