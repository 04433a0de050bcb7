//! HTTP endpoints. Bodies are JSON; SVG and log endpoints return text.
//!
//! Routes under `/api/participant` make up the participant-facing surface
//! and never expose recorded constructs or strike counts. Everything else
//! is for the interviewer and the analyst.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::analysis::{
    category_distribution, disagreements, reproducibility_report, usage_report, Aesthetic, AestheticMapping,
    AnalysisEvent, Category, CategoryTag, StudyAnalysis,
};
use crate::generator::{generate_element_set, GeneratorParams, DEFAULT_ELEMENT_COUNT};
use crate::metrics::{evaluate_all, evaluate_many, explain};
use crate::model::{catalog, Drawing, Graph, MetricId};
use crate::optimizer::{greedy_refine, optimize_layout, AnnealConfig, Objective};
use crate::render::{render_svg, render_text_card};
use crate::rgt::{ConstructRequest, Element, Origin, Payload, SessionState, StudyConfig};

use super::store::Store;
use super::ApiError;

pub const REQUEST_ID_HEADER: &str = "x-request-id";
pub const DEFAULT_ANALYST: &str = "primary";

/// Method and path of every participant-facing route.
pub const PARTICIPANT_ROUTES: [(&str, &str); 6] = [
    ("GET", "/api/participant/sessions/{session}"),
    ("POST", "/api/participant/sessions/{session}/triad"),
    ("POST", "/api/participant/sessions/{session}/constructs"),
    ("POST", "/api/participant/sessions/{session}/complete"),
    ("POST", "/api/participant/sessions/{session}/elements"),
    ("GET", "/api/participant/elements/{element}/svg"),
];

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Store>,
}

impl AppState {
    pub fn new(store: Store) -> Self {
        AppState { store: Arc::new(store) }
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn request_id(headers: &HeaderMap) -> Option<String> {
    headers
        .get(REQUEST_ID_HEADER)
        .and_then(|v| v.to_str().ok())
        .map(str::to_string)
        .filter(|s| !s.is_empty())
}

fn svg(body: String) -> Response {
    ([(header::CONTENT_TYPE, "image/svg+xml")], body).into_response()
}

fn text(body: String) -> Response {
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], body).into_response()
}

fn element_svg(e: &Element) -> ApiResult<String> {
    match &e.payload {
        Payload::Drawing { drawing } => Ok(render_svg(drawing)),
        Payload::Image { media_type, data } if media_type == "image/svg+xml" => Ok(data.clone()),
        Payload::Text { text } => Ok(render_text_card(text, Default::default())),
        Payload::Image { media_type, .. } => Err(ApiError::bad_request(format!(
            "element {} is a {media_type} image and has no SVG form",
            e.id
        ))),
    }
}

/// Everything the participant's screen may call.
pub fn participant_router() -> Router<AppState> {
    Router::new()
        .route("/api/participant/sessions/{session}", get(participant_view))
        .route("/api/participant/sessions/{session}/triad", post(participant_next_triad))
        .route("/api/participant/sessions/{session}/constructs", post(participant_construct))
        .route("/api/participant/sessions/{session}/complete", post(participant_complete))
        .route("/api/participant/sessions/{session}/elements", post(participant_element))
        .route("/api/participant/elements/{element}/svg", get(participant_element_svg))
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .merge(participant_router())
        .route("/api/catalog", get(get_catalog))
        .route("/api/studies", get(list_studies).post(create_study))
        .route("/api/studies/{study}", get(get_study))
        .route("/api/studies/{study}/sessions", get(list_sessions).post(start_session))
        .route("/api/studies/{study}/constructs", get(study_constructs))
        .route("/api/studies/{study}/tags", post(tag))
        .route("/api/studies/{study}/mappings", post(map))
        .route("/api/studies/{study}/disagreements", get(study_disagreements))
        .route("/api/sessions/{session}/status", get(session_status))
        .route("/api/sessions/{session}/export", get(session_export))
        .route("/api/sessions/{session}/log", get(session_log))
        .route("/api/sessions/{session}/terminate", post(session_terminate))
        .route("/api/elements/{element}", get(get_element))
        .route("/api/elements/{element}/svg", get(get_element_svg))
        .route("/api/elements/{element}/metrics", get(element_metrics))
        .route("/api/metrics", post(post_metrics))
        .route("/api/render", post(post_render))
        .route("/api/optimize", post(post_optimize))
        .route("/api/reports/usage", get(report_usage))
        .route("/api/reports/usage/table", get(report_usage_table))
        .route("/api/reports/reproducibility", get(report_reproducibility))
        .route("/api/reports/categories", get(report_categories))
        .with_state(state)
}

// participant surface

#[derive(Debug, Serialize, Deserialize)]
pub struct ElementRef {
    pub id: String,
    pub svg_url: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TriadResponse {
    pub triad_id: usize,
    pub elements: Vec<ElementRef>,
}

fn triad_response(t: crate::rgt::Triad) -> TriadResponse {
    TriadResponse {
        triad_id: t.triad_id,
        elements: t
            .elements
            .into_iter()
            .map(|id| ElementRef {
                svg_url: format!("/api/participant/elements/{id}/svg"),
                id,
            })
            .collect(),
    }
}

async fn participant_view(State(s): State<AppState>, Path(session): Path<String>) -> ApiResult<Json<Value>> {
    let view = s.store.read_session(&session, |x| x.participant_view())?;
    Ok(Json(json!({
        "session_id": view.session_id,
        "state": view.state,
        "triads_completed": view.triads_completed,
        "current_triad": view.current_triad.map(triad_response),
    })))
}

async fn participant_next_triad(
    State(s): State<AppState>,
    Path(session): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<TriadResponse>> {
    let rid = request_id(&headers);
    let t = s.store.with_session(&session, |x| x.next_triad(rid.as_deref()))?;
    Ok(Json(triad_response(t)))
}

async fn participant_construct(
    State(s): State<AppState>,
    Path(session): Path<String>,
    headers: HeaderMap,
    Json(req): Json<ConstructRequest>,
) -> ApiResult<Json<Value>> {
    let rid = request_id(&headers);
    let c = s.store.with_session(&session, |x| x.record_construct(rid.as_deref(), &req))?;
    // the new construct's id only: the response must not reveal history
    Ok(Json(json!({ "id": c.id, "triad_id": c.triad_id })))
}

async fn participant_complete(
    State(s): State<AppState>,
    Path(session): Path<String>,
    headers: HeaderMap,
) -> ApiResult<Json<Value>> {
    let rid = request_id(&headers);
    let state = s.store.with_session(&session, |x| x.complete_triad(rid.as_deref()))?;
    let done = s.store.read_session(&session, |x| x.participant_view().triads_completed)?;
    Ok(Json(json!({ "state": state, "triads_completed": done })))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AddElementRequest {
    pub payload: Payload,
    #[serde(default)]
    pub label: Option<String>,
}

async fn participant_element(
    State(s): State<AppState>,
    Path(session): Path<String>,
    headers: HeaderMap,
    Json(req): Json<AddElementRequest>,
) -> ApiResult<Json<Value>> {
    let rid = request_id(&headers);
    let id = s
        .store
        .with_session(&session, |x| x.add_participant_element(rid.as_deref(), req.payload, req.label))?;
    Ok(Json(json!({ "id": id, "svg_url": format!("/api/participant/elements/{id}/svg") })))
}

async fn participant_element_svg(State(s): State<AppState>, Path(element): Path<String>) -> ApiResult<Response> {
    Ok(svg(element_svg(&s.store.element(&element)?)?))
}

// studies and sessions

async fn get_catalog() -> Json<Value> {
    Json(Value::Array(
        catalog()
            .iter()
            .map(|e| {
                json!({
                    "id": e.id,
                    "display_name": e.display_name,
                    "category": e.category,
                    "evaluated": e.evaluated,
                    "novel": e.novel,
                    "explanation": explain(e.id),
                })
            })
            .collect(),
    ))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct GenerateSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(flatten)]
    pub params: GeneratorParams,
}

fn default_count() -> usize {
    DEFAULT_ELEMENT_COUNT
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ElementInput {
    pub payload: Payload,
    #[serde(default)]
    pub origin: Option<Origin>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct CreateStudyRequest {
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub config: StudyConfig,
    #[serde(default)]
    pub generate: Option<GenerateSpec>,
    #[serde(default)]
    pub elements: Vec<ElementInput>,
}

async fn create_study(State(s): State<AppState>, Json(req): Json<CreateStudyRequest>) -> ApiResult<Json<Value>> {
    let mut elements = Vec::new();
    if let Some(g) = &req.generate {
        for d in generate_element_set(&g.params, g.count)? {
            elements.push(Element::generated(d)?);
        }
    }
    for e in req.elements {
        elements.push(Element::new(e.payload, e.origin.unwrap_or(Origin::Generated), e.label)?);
    }
    let study = s.store.create_study(&req.label, elements, req.config)?;
    Ok(Json(serde_json::to_value(s.store.study_record(&study.id)?).expect("records serialize")))
}

async fn list_studies(State(s): State<AppState>) -> ApiResult<Json<Value>> {
    Ok(Json(serde_json::to_value(s.store.list_studies()?).expect("records serialize")))
}

async fn get_study(State(s): State<AppState>, Path(study): Path<String>) -> ApiResult<Json<Value>> {
    s.store.study(&study)?;
    Ok(Json(serde_json::to_value(s.store.study_record(&study)?).expect("records serialize")))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StartSessionRequest {
    pub participant: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub session_id: Option<String>,
}

async fn start_session(
    State(s): State<AppState>,
    Path(study): Path<String>,
    Json(req): Json<StartSessionRequest>,
) -> ApiResult<Json<Value>> {
    let id = s.store.start_session(&study, &req.participant, req.seed, req.session_id.as_deref())?;
    Ok(Json(json!({ "session_id": id })))
}

async fn list_sessions(State(s): State<AppState>, Path(study): Path<String>) -> ApiResult<Json<Value>> {
    s.store.study(&study)?;
    Ok(Json(json!(s.store.sessions_of(&study)?)))
}

async fn session_status(State(s): State<AppState>, Path(session): Path<String>) -> ApiResult<Json<Value>> {
    let v = s.store.read_session(&session, |x| {
        json!({
            "session_id": x.id(),
            "study_id": x.study_id(),
            "participant": x.participant(),
            "state": x.state(),
            "finish": x.finish(),
            "strikes": x.strikes(),
            "strike_limit": x.config().strike_limit,
            "triads": x.triads().len(),
            "constructs": x.constructs().len(),
            "current_triad": x.open_triad(),
        })
    })?;
    Ok(Json(v))
}

async fn session_export(State(s): State<AppState>, Path(session): Path<String>) -> ApiResult<Response> {
    let body = s.store.read_session(&session, |x| x.export().to_json())?;
    Ok(([(header::CONTENT_TYPE, "application/json")], body).into_response())
}

async fn session_log(State(s): State<AppState>, Path(session): Path<String>) -> ApiResult<Response> {
    Ok(text(s.store.read_session(&session, |x| x.log_jsonl())?))
}

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct TerminateRequest {
    #[serde(default)]
    pub note: Option<String>,
}

async fn session_terminate(
    State(s): State<AppState>,
    Path(session): Path<String>,
    headers: HeaderMap,
    body: Option<Json<TerminateRequest>>,
) -> ApiResult<Json<Value>> {
    let rid = request_id(&headers);
    let note = body.and_then(|b| b.0.note);
    let state: SessionState = s.store.with_session(&session, |x| x.terminate(rid.as_deref(), note))?;
    Ok(Json(json!({ "state": state })))
}

// elements, metrics, optimization

async fn get_element(State(s): State<AppState>, Path(element): Path<String>) -> ApiResult<Json<Element>> {
    Ok(Json(s.store.element(&element)?))
}

async fn get_element_svg(State(s): State<AppState>, Path(element): Path<String>) -> ApiResult<Response> {
    Ok(svg(element_svg(&s.store.element(&element)?)?))
}

#[derive(Debug, Default, Deserialize)]
pub struct MetricsQuery {
    /// Comma-separated metric ids; all when absent.
    #[serde(default)]
    pub only: Option<String>,
}

fn metrics_json(d: &Drawing, q: &MetricsQuery) -> ApiResult<Value> {
    match &q.only {
        None => Ok(serde_json::to_value(evaluate_all(d)?).expect("vectors serialize")),
        Some(list) => {
            let ids = list
                .split(',')
                .map(|n| n.trim().parse::<MetricId>().map_err(|_| crate::metrics::MetricsError::UnknownMetric(n.to_string())))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(serde_json::to_value(evaluate_many(d, &ids)?).expect("results serialize"))
        }
    }
}

async fn element_metrics(
    State(s): State<AppState>,
    Path(element): Path<String>,
    Query(q): Query<MetricsQuery>,
) -> ApiResult<Json<Value>> {
    let e = s.store.element(&element)?;
    let d = e
        .drawing()
        .ok_or_else(|| ApiError::bad_request(format!("element {element} is not a drawing")))?;
    Ok(Json(metrics_json(d, &q)?))
}

async fn post_metrics(Query(q): Query<MetricsQuery>, Json(d): Json<Drawing>) -> ApiResult<Json<Value>> {
    Ok(Json(metrics_json(&d, &q)?))
}

async fn post_render(Json(d): Json<Drawing>) -> ApiResult<Response> {
    let problems = crate::model::validate_drawing(&d);
    if !problems.is_empty() {
        return Err(crate::metrics::MetricsError::InvalidDrawing(problems).into());
    }
    Ok(svg(render_svg(&d)))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OptimizeRequest {
    /// Lay out this graph from a random start, or refine `drawing`.
    #[serde(default)]
    pub graph: Option<Graph>,
    #[serde(default)]
    pub drawing: Option<Drawing>,
    #[serde(default)]
    pub objective: Option<Objective>,
    #[serde(default)]
    pub config: Option<AnnealConfig>,
}

async fn post_optimize(Json(req): Json<OptimizeRequest>) -> ApiResult<Json<Value>> {
    let objective = req.objective.unwrap_or_default();
    let config = req.config.unwrap_or_default();
    let outcome = match (req.graph, req.drawing) {
        (Some(g), None) => {
            g.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;
            tokio::task::spawn_blocking(move || optimize_layout(&g, &objective, &config))
                .await
                .map_err(|e| ApiError::internal(e.to_string()))??
        }
        (None, Some(d)) => tokio::task::spawn_blocking(move || greedy_refine(&d, &objective, &config))
            .await
            .map_err(|e| ApiError::internal(e.to_string()))??,
        _ => return Err(ApiError::bad_request("give exactly one of `graph` or `drawing`")),
    };
    Ok(Json(json!({
        "drawing": outcome.drawing,
        "value": outcome.value,
        "start_value": outcome.start_value,
        "iterations": outcome.iterations(),
        "trace": outcome.trace,
    })))
}

// analysis

#[derive(Debug, Serialize, Deserialize)]
pub struct TagRequest {
    pub construct_id: String,
    pub category: Category,
    #[serde(default = "default_analyst")]
    pub analyst: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MapRequest {
    pub construct_id: String,
    pub aesthetic: Aesthetic,
    #[serde(default = "default_analyst")]
    pub analyst: String,
}

fn default_analyst() -> String {
    DEFAULT_ANALYST.to_string()
}

async fn tag(State(s): State<AppState>, Path(study): Path<String>, Json(req): Json<TagRequest>) -> ApiResult<Json<Value>> {
    let e = s.store.annotate(
        &study,
        AnalysisEvent::Tag(CategoryTag {
            construct_id: req.construct_id,
            category: req.category,
            analyst: req.analyst,
        }),
    )?;
    Ok(Json(serde_json::to_value(e).expect("events serialize")))
}

async fn map(State(s): State<AppState>, Path(study): Path<String>, Json(req): Json<MapRequest>) -> ApiResult<Json<Value>> {
    let e = s.store.annotate(
        &study,
        AnalysisEvent::Map(AestheticMapping {
            construct_id: req.construct_id,
            aesthetic: req.aesthetic,
            analyst: req.analyst,
        }),
    )?;
    Ok(Json(serde_json::to_value(e).expect("events serialize")))
}

#[derive(Debug, Default, Deserialize)]
pub struct AnalystQuery {
    #[serde(default)]
    pub analyst: Option<String>,
}

async fn study_constructs(
    State(s): State<AppState>,
    Path(study): Path<String>,
    Query(q): Query<AnalystQuery>,
) -> ApiResult<Json<Value>> {
    let a = s.store.analysis(&study)?;
    let analyst = q.analyst.unwrap_or_else(default_analyst);
    let rows: Vec<Value> = a
        .constructs()
        .map(|c| {
            json!({
                "construct": c,
                "category": a.tag(&c.id, &analyst),
                "aesthetic": a.mapping(&c.id, &analyst),
            })
        })
        .collect();
    Ok(Json(Value::Array(rows)))
}

async fn study_disagreements(State(s): State<AppState>, Path(study): Path<String>) -> ApiResult<Json<Value>> {
    let a = s.store.analysis(&study)?;
    Ok(Json(serde_json::to_value(disagreements(&a)).expect("serializes")))
}

#[derive(Debug, Default, Deserialize)]
pub struct ReportQuery {
    /// Comma-separated study ids; every stored study when absent.
    #[serde(default)]
    pub studies: Option<String>,
    #[serde(default)]
    pub analyst: Option<String>,
}

fn studies_for(s: &AppState, q: &ReportQuery) -> ApiResult<(Vec<StudyAnalysis>, String)> {
    let ids: Vec<String> = match &q.studies {
        Some(list) => list.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect(),
        None => s.store.list_studies()?.into_iter().map(|r| r.id).collect(),
    };
    let studies = ids.iter().map(|id| s.store.analysis(id)).collect::<Result<Vec<_>, _>>()?;
    Ok((studies, q.analyst.clone().unwrap_or_else(default_analyst)))
}

async fn report_usage(State(s): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Json<Value>> {
    let (studies, analyst) = studies_for(&s, &q)?;
    Ok(Json(serde_json::to_value(usage_report(&studies, &analyst)).expect("serializes")))
}

async fn report_usage_table(State(s): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Response> {
    let (studies, analyst) = studies_for(&s, &q)?;
    Ok(text(usage_report(&studies, &analyst).render_table()))
}

async fn report_reproducibility(State(s): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Json<Value>> {
    let (studies, analyst) = studies_for(&s, &q)?;
    if studies.is_empty() {
        return Err(ApiError::bad_request("no studies to report on"));
    }
    Ok(Json(serde_json::to_value(reproducibility_report(&studies, &analyst)).expect("serializes")))
}

async fn report_categories(State(s): State<AppState>, Query(q): Query<ReportQuery>) -> ApiResult<Json<Value>> {
    let (studies, analyst) = studies_for(&s, &q)?;
    Ok(Json(serde_json::to_value(category_distribution(&studies, &analyst)).expect("serializes")))
}
