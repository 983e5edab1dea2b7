use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::Json;
use nlflow_core::autocomplete::{Suggestion, TokenCandidate};
use nlflow_core::dataflow::{Column, Diagram, DiagramDelta, DiagramDocument, NodeId, Point};
use nlflow_core::parser::FunctionFrame;
use nlflow_core::tagger::TaggedQuery;
use nlflow_core::{QueryOptions, Session, TagOverride};
use serde::{Deserialize, Serialize};

use crate::error::ApiError;
use crate::sessions::Slot;
use crate::AppState;

type ApiResult<T> = Result<Json<T>, ApiError>;

/// JSON body extractor whose rejections use the service error format.
pub struct Body<T>(pub T);

impl<S, T> FromRequest<S> for Body<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
    S: Send + Sync,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        match Json::<T>::from_request(req, state).await {
            Ok(Json(v)) => Ok(Body(v)),
            Err(e) => Err(ApiError::bad_request(e.body_text())),
        }
    }
}

fn slot(state: &AppState, id: &str) -> Result<Arc<Slot>, ApiError> {
    state.sessions.get(id).ok_or_else(|| ApiError::session_not_found(id))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DiagramView {
    pub diagram: DiagramDocument,
    pub hash: String,
    pub can_undo: bool,
    pub can_redo: bool,
}

impl DiagramView {
    fn of(d: &Diagram) -> DiagramView {
        DiagramView {
            diagram: d.to_document(),
            hash: d.hash(),
            can_undo: d.can_undo(),
            can_redo: d.can_redo(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub sessions: usize,
}

pub async fn health(State(state): State<AppState>) -> Json<Health> {
    state.sessions.sweep();
    Json(Health {
        status: "ok".into(),
        sessions: state.sessions.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Created {
    pub id: String,
    #[serde(flatten)]
    pub view: DiagramView,
}

pub async fn create_session(State(state): State<AppState>) -> ApiResult<Created> {
    let mut diagram = Diagram::new();
    for t in state.datasets.iter() {
        diagram.add_dataset(t.clone())?;
    }
    let view = DiagramView::of(&diagram);
    let id = state.sessions.create(Session::new(diagram));
    Ok(Json(Created { id, view }))
}

pub async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<serde_json::Value> {
    if !state.sessions.remove(&id) {
        return Err(ApiError::session_not_found(&id));
    }
    Ok(Json(serde_json::json!({})))
}

pub async fn get_diagram(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<DiagramView> {
    Ok(Json(slot(&state, &id)?.read(|s| DiagramView::of(&s.diagram))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Saved {
    pub document: String,
    pub hash: String,
}

pub async fn save(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Saved> {
    Ok(Json(slot(&state, &id)?.read(|s| Saved {
        document: s.diagram.save(),
        hash: s.diagram.hash(),
    })))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadRequest {
    pub document: String,
}

pub async fn load(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<LoadRequest>,
) -> ApiResult<DiagramView> {
    let slot = slot(&state, &id)?;
    let diagram = Diagram::load(&req.document)?;
    slot.write(|s| {
        *s = Session::new(diagram);
        Json(DiagramView::of(&s.diagram))
    })
    .map_err(Into::into)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagRequest {
    pub query: String,
    #[serde(default)]
    pub overrides: Vec<TagOverride>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TagResponse {
    #[serde(flatten)]
    pub tagged: TaggedQuery,
    pub overrides: Vec<TagOverride>,
}

pub async fn tag(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<TagRequest>,
) -> ApiResult<TagResponse> {
    let tagged = slot(&state, &id)?.read(|s| state.engine.tag_overridden(&s.diagram, &req.query, &req.overrides))?;
    Ok(Json(TagResponse {
        tagged,
        overrides: req.overrides,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryRequest {
    pub text: String,
    #[serde(default)]
    pub tag_overrides: Vec<TagOverride>,
    /// Index of the derivation to execute, from `derivations`.
    #[serde(default)]
    pub derivation: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QueryResponse {
    pub signature: String,
    pub frames: Vec<FunctionFrame>,
    /// Signatures of every ranked derivation, best first.
    pub derivations: Vec<String>,
    pub chosen: usize,
    pub created: Vec<NodeId>,
    pub delta: DiagramDelta,
    #[serde(flatten)]
    pub view: DiagramView,
}

pub async fn query(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<QueryRequest>,
) -> ApiResult<QueryResponse> {
    let options = QueryOptions {
        overrides: req.tag_overrides,
        derivation: req.derivation,
    };
    let result = slot(&state, &id)?.write(|s| {
        let r = state.engine.run(s, &req.text, &options)?;
        let i = &r.interpretation;
        Ok::<_, ApiError>(QueryResponse {
            signature: i.signature(),
            frames: i.frames().to_vec(),
            derivations: i.derivations.iter().map(|d| d.signature()).collect(),
            chosen: i.chosen,
            created: r.execution.created.clone(),
            delta: r.execution.delta.clone(),
            view: DiagramView::of(&s.diagram),
        })
    })??;
    Ok(Json(result))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutocompleteRequest {
    pub partial: String,
    #[serde(default = "default_max")]
    pub max: usize,
}

fn default_max() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Suggestions {
    pub suggestions: Vec<Suggestion>,
}

pub async fn autocomplete(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<AutocompleteRequest>,
) -> ApiResult<Suggestions> {
    let suggestions = slot(&state, &id)?.read(|s| state.engine.suggest(&s.diagram, &req.partial, req.max));
    Ok(Json(Suggestions { suggestions }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TokenRequest {
    pub partial_word: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidates {
    pub candidates: Vec<TokenCandidate>,
}

pub async fn token_complete(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<TokenRequest>,
) -> ApiResult<Candidates> {
    let candidates = slot(&state, &id)?.read(|s| state.engine.complete_token(&s.diagram, &req.partial_word));
    Ok(Json(Candidates { candidates }))
}

/// A node id, or the string `"background"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FocusTarget {
    Node(NodeId),
    Other(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusEvent {
    pub target: FocusTarget,
    #[serde(default)]
    pub x: Option<f64>,
    #[serde(default)]
    pub y: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FocusRanking {
    /// Nodes by focus score, most focused first.
    pub ranking: Vec<NodeId>,
}

pub async fn focus_event(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(ev): Body<FocusEvent>,
) -> ApiResult<FocusRanking> {
    let target = match ev.target {
        FocusTarget::Node(n) => Some(n),
        FocusTarget::Other(s) if s == "background" => None,
        FocusTarget::Other(s) => return Err(ApiError::bad_request(format!("bad focus target {s:?}"))),
    };
    let position = match (ev.x, ev.y) {
        (Some(x), Some(y)) => Some(Point::new(x, y)),
        _ => None,
    };
    let ranking = slot(&state, &id)?.write(|s| {
        s.tracker.record_click(&s.diagram, target, position)?;
        Ok::<_, ApiError>(s.tracker.rank(&s.diagram, |_| true))
    })??;
    Ok(Json(FocusRanking { ranking }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionRequest {
    pub node: NodeId,
    pub rows: Vec<usize>,
}

pub async fn set_selection(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<SelectionRequest>,
) -> ApiResult<DiagramView> {
    let view = slot(&state, &id)?.write(|s| {
        s.diagram.set_selection(req.node, req.rows)?;
        Ok::<_, ApiError>(DiagramView::of(&s.diagram))
    })??;
    Ok(Json(view))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoveRequest {
    pub node: NodeId,
    pub x: f64,
    pub y: f64,
    #[serde(default = "yes")]
    pub pin: bool,
}

fn yes() -> bool {
    true
}

pub async fn move_node(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Body(req): Body<MoveRequest>,
) -> ApiResult<DiagramView> {
    let view = slot(&state, &id)?.write(|s| {
        s.diagram.move_node(req.node, Point::new(req.x, req.y), req.pin)?;
        Ok::<_, ApiError>(DiagramView::of(&s.diagram))
    })??;
    Ok(Json(view))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryStep {
    pub delta: DiagramDelta,
    #[serde(flatten)]
    pub view: DiagramView,
}

fn step(
    state: &AppState,
    id: &str,
    f: fn(&mut Diagram) -> nlflow_core::Result<DiagramDelta>,
) -> ApiResult<HistoryStep> {
    let out = slot(state, id)?.write(|s| {
        let delta = f(&mut s.diagram)?;
        s.tracker.purge(&s.diagram);
        Ok::<_, ApiError>(HistoryStep {
            delta,
            view: DiagramView::of(&s.diagram),
        })
    })??;
    Ok(Json(out))
}

pub async fn undo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<HistoryStep> {
    step(&state, &id, Diagram::undo)
}

pub async fn redo(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<HistoryStep> {
    step(&state, &id, Diagram::redo)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UploadParams {
    #[serde(default)]
    pub delimiter: Option<char>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub name: String,
    pub rows: usize,
    pub columns: Vec<Column>,
}

/// Registers a delimiter-separated table; the request body is the file.
pub async fn upload_dataset(
    State(state): State<AppState>,
    Path((id, name)): Path<(String, String)>,
    Query(params): Query<UploadParams>,
    text: String,
) -> ApiResult<DatasetInfo> {
    let delimiter = params.delimiter.unwrap_or(',');
    if !delimiter.is_ascii() {
        return Err(ApiError::bad_request(format!("delimiter {delimiter:?} is not ASCII")));
    }
    let info = slot(&state, &id)?.write(|s| {
        let t = s.diagram.load_dataset(&name, &text, delimiter as u8)?;
        Ok::<_, ApiError>(DatasetInfo {
            name: t.name.clone(),
            rows: t.row_count(),
            columns: t.columns.clone(),
        })
    })??;
    Ok(Json(info))
}
