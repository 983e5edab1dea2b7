//! Session-scoped HTTP interface to the query engine.
//!
//! All bodies are JSON. Routes:
//!
//! | method | path | body |
//! |---|---|---|
//! | GET | `/health` | |
//! | POST | `/session` | |
//! | DELETE | `/session/{id}` | |
//! | GET | `/session/{id}/diagram` | |
//! | POST | `/session/{id}/save` | |
//! | POST | `/session/{id}/load` | `{document}` |
//! | POST | `/session/{id}/tag` | `{query, overrides?}` |
//! | POST | `/session/{id}/query` | `{text, tagOverrides?, derivation?}` |
//! | POST | `/session/{id}/autocomplete` | `{partial, max?}` |
//! | POST | `/session/{id}/tokenComplete` | `{partialWord}` |
//! | POST | `/session/{id}/focusEvent` | `{target: id or "background", x?, y?}` |
//! | POST | `/session/{id}/selection` | `{node, rows}` |
//! | POST | `/session/{id}/move` | `{node, x, y, pin?}` |
//! | POST | `/session/{id}/undo`, `/redo` | |
//! | POST | `/session/{id}/dataset/{name}?delimiter=,` | raw table text |
//!
//! Failures return an [`ErrorBody`].

pub mod api;
mod error;
pub mod sessions;

use std::sync::Arc;
use std::time::Duration;

use axum::routing::{get, post};
use axum::Router;
use nlflow_core::dataflow::Table;
use nlflow_core::Engine;

pub use error::{ApiError, ErrorBody};
pub use sessions::{Busy, SessionStore, Slot};

pub const DEFAULT_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug, Clone)]
pub struct AppState {
    pub engine: Arc<Engine>,
    pub sessions: Arc<SessionStore>,
    /// Tables registered in every new session.
    pub datasets: Arc<Vec<Table>>,
}

impl AppState {
    pub fn new(engine: Engine, datasets: Vec<Table>, ttl: Duration) -> AppState {
        AppState {
            engine: Arc::new(engine),
            sessions: Arc::new(SessionStore::new(ttl)),
            datasets: Arc::new(datasets),
        }
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/health", get(api::health))
        .route("/session", post(api::create_session))
        .route("/session/{id}", axum::routing::delete(api::delete_session))
        .route("/session/{id}/diagram", get(api::get_diagram))
        .route("/session/{id}/save", post(api::save))
        .route("/session/{id}/load", post(api::load))
        .route("/session/{id}/tag", post(api::tag))
        .route("/session/{id}/query", post(api::query))
        .route("/session/{id}/autocomplete", post(api::autocomplete))
        .route("/session/{id}/tokenComplete", post(api::token_complete))
        .route("/session/{id}/focusEvent", post(api::focus_event))
        .route("/session/{id}/selection", post(api::set_selection))
        .route("/session/{id}/move", post(api::move_node))
        .route("/session/{id}/undo", post(api::undo))
        .route("/session/{id}/redo", post(api::redo))
        .route("/session/{id}/dataset/{name}", post(api::upload_dataset))
        .with_state(state)
}

/// Serves until the listener fails.
pub async fn serve(listener: tokio::net::TcpListener, state: AppState) -> std::io::Result<()> {
    axum::serve(listener, router(state)).await
}
