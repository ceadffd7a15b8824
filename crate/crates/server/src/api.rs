//! HTTP routes. Every mutation goes through one action envelope and one
//! session lock; reads take the same lock so they never observe a half
//! applied action.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use etable_core::etable::{EntityRef, Page};
use etable_core::pattern::OperatorRecord;
use etable_core::session::ActionOutcome;
use etable_core::tgdb::{EdgeType, NodeType};
use etable_core::{emit_sql, UserAction};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use crate::error::ApiError;
use crate::store::{SessionHandle, SessionStore};

pub type AppState = Arc<SessionStore>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaDocument {
    pub node_types: Vec<NodeType>,
    pub edge_types: Vec<EdgeType>,
    pub node_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedSession {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryDocument {
    pub history: Vec<OperatorRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SqlDocument {
    pub statement: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RevertRequest {
    pub step: usize,
}

#[derive(Debug, Default, Deserialize)]
pub struct PageQuery {
    pub page: Option<usize>,
    pub size: Option<usize>,
}

#[derive(Debug, Deserialize)]
pub struct RefsQuery {
    pub row: String,
    pub column: String,
    pub page: Option<usize>,
    pub size: Option<usize>,
}

/// One page of a set-valued cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefsPage {
    pub row: String,
    pub column: String,
    pub page: usize,
    pub page_size: usize,
    pub count: usize,
    pub refs: Vec<EntityRef>,
}

pub fn router(store: AppState, static_dir: Option<&std::path::Path>) -> Router {
    let api = Router::new()
        .route("/schema", get(schema))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/actions", post(act))
        .route("/sessions/{id}/table", get(table))
        .route("/sessions/{id}/history", get(history))
        .route("/sessions/{id}/revert", post(revert))
        .route("/sessions/{id}/sql", get(sql))
        .route("/sessions/{id}/refs", get(refs))
        .with_state(store);
    match static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api.fallback(|| async { ApiError::new(StatusCode::NOT_FOUND, "not_found", "no such endpoint") }),
    }
}

fn session(store: &SessionStore, id: &str) -> Result<SessionHandle, ApiError> {
    store.get(id).ok_or_else(|| ApiError::unknown_session(id))
}

async fn schema(State(store): State<AppState>) -> Json<SchemaDocument> {
    let g = store.graph();
    Json(SchemaDocument {
        node_types: g.schema().node_types().to_vec(),
        edge_types: g.schema().edge_types().to_vec(),
        node_counts: g.type_counts().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
    })
}

async fn create_session(State(store): State<AppState>) -> (StatusCode, Json<CreatedSession>) {
    (StatusCode::CREATED, Json(CreatedSession { id: store.create() }))
}

/// Parses an action envelope, reporting the line and column of any syntax
/// error in `detail`.
pub fn parse_action(body: &[u8]) -> Result<UserAction, ApiError> {
    serde_json::from_slice(body).map_err(|e| {
        ApiError::malformed(format!("not a valid action envelope: {e}"))
            .with_detail(serde_json::json!({ "line": e.line(), "column": e.column() }))
    })
}

async fn act(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ActionOutcome>, ApiError> {
    let handle = session(&store, &id)?;
    let action = parse_action(&body)?;
    let mut entry = handle.lock();
    entry.session.apply(&action)?;
    Ok(Json(entry.session.outcome()?))
}

async fn table(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<PageQuery>,
) -> Result<Json<Page>, ApiError> {
    let handle = session(&store, &id)?;
    let entry = handle.lock();
    let s = &entry.session;
    let page = s.page(q.page.unwrap_or(s.presentation().page), q.size.unwrap_or(s.page_size()))?;
    Ok(Json(page))
}

async fn history(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<HistoryDocument>, ApiError> {
    let handle = session(&store, &id)?;
    let entry = handle.lock();
    Ok(Json(HistoryDocument { history: entry.session.history().to_vec() }))
}

async fn revert(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<ActionOutcome>, ApiError> {
    let handle = session(&store, &id)?;
    let req: RevertRequest =
        serde_json::from_slice(&body).map_err(|e| ApiError::malformed(format!("expected {{\"step\": n}}: {e}")))?;
    let mut entry = handle.lock();
    entry.session.act_revert(req.step)?;
    Ok(Json(entry.session.outcome()?))
}

async fn sql(State(store): State<AppState>, Path(id): Path<String>) -> Result<Json<SqlDocument>, ApiError> {
    let handle = session(&store, &id)?;
    let entry = handle.lock();
    let s = &entry.session;
    let statement = emit_sql(s.pattern()?, s.graph().schema())?.statement;
    Ok(Json(SqlDocument { statement }))
}

async fn refs(
    State(store): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RefsQuery>,
) -> Result<Json<RefsPage>, ApiError> {
    let handle = session(&store, &id)?;
    let entry = handle.lock();
    let table = entry.session.table()?;
    let column = table.find_column(&q.column)?;
    if !column.is_set_valued() {
        return Err(etable_core::Error::InvalidColumn(column.id.clone()).into());
    }
    let row = table.row(&q.row).ok_or_else(|| etable_core::Error::UnknownRow(q.row.clone()))?;
    let cell = row.refs(&column.id).ok_or_else(|| etable_core::Error::InvalidColumn(column.id.clone()))?;
    let (page, size) = (q.page.unwrap_or(1), q.size.unwrap_or(entry.session.page_size()));
    if page == 0 || size == 0 {
        return Err(etable_core::Error::InvalidArgument("page and size start at 1".into()).into());
    }
    Ok(Json(RefsPage {
        row: row.key.clone(),
        column: column.id.clone(),
        page,
        page_size: size,
        count: cell.count,
        refs: cell.refs.iter().skip((page - 1) * size).take(size).cloned().collect(),
    }))
}
