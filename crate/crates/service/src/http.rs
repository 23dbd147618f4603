//! HTTP/JSON surface over [`SessionStore`].

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use deepie_core::LatentVector;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::SessionError;
use crate::registry::ModelInfo;
use crate::session::{GenerationRecord, ReviewSet, SessionStatus};
use crate::store::{now_ms, ParamsOverride, SessionStore};

pub type AppState = Arc<SessionStore>;

pub fn router(store: AppState) -> Router {
    Router::new()
        .route("/models", get(list_models))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_summary))
        .route("/sessions/{id}/generation", get(get_generation))
        .route("/sessions/{id}/advance", post(advance))
        .route("/sessions/{id}/review", post(start_review).get(get_review))
        .route("/sessions/{id}/best", post(submit_best))
        .route("/sessions/{id}/history", get(history))
        .with_state(store)
}

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        Self(e)
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self(SessionError::Validation(e.body_text()))
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match self.0.code() {
            "not_found" => StatusCode::NOT_FOUND,
            "validation" => StatusCode::UNPROCESSABLE_ENTITY,
            "conflict" | "session_state" => StatusCode::CONFLICT,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        let body = json!({ "error": self.0.code(), "message": self.0.to_string() });
        (status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateRequest {
    pub model_id: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Option<ParamsOverride>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CreateResponse {
    pub session_id: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SessionSummary {
    pub session_id: String,
    pub model_id: String,
    pub status: SessionStatus,
    pub generation: u64,
    pub population_size: usize,
    pub ratio: Option<f64>,
    pub created_ms: u64,
    pub updated_ms: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct EncodedImage {
    pub index: usize,
    pub png_base64: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct GenerationResponse {
    pub generation: u64,
    pub images: Vec<EncodedImage>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AdvanceRequest {
    pub selected: Vec<usize>,
    pub mutation_std: f64,
    pub expected_generation: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AdvanceResponse {
    pub generation: u64,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewRequest {
    #[serde(default)]
    pub expected_generation: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewStarted {
    pub entries: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewImage {
    pub position: usize,
    pub png_base64: String,
}

/// Blinded review: images only, no generation labels.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReviewResponse {
    pub status: SessionStatus,
    pub images: Vec<ReviewImage>,
    pub pick: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BestRequest {
    pub position: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BestResponse {
    pub ratio: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HistoryResponse {
    pub session_id: String,
    pub model_id: String,
    pub seed: u64,
    pub params: deepie_core::EvolutionParams,
    pub status: SessionStatus,
    pub generation: u64,
    pub history: Vec<GenerationRecord>,
    pub review: Option<ReviewSet>,
    pub ratio: Option<f64>,
}

async fn list_models(State(store): State<AppState>) -> Json<Vec<ModelInfo>> {
    Json(store.registry().list())
}

async fn create_session(
    State(store): State<AppState>,
    body: Result<Json<CreateRequest>, JsonRejection>,
) -> Result<(StatusCode, Json<CreateResponse>), ApiError> {
    let Json(req) = body?;
    let session_id = store.create(&req.model_id, req.params, req.seed)?;
    Ok((StatusCode::CREATED, Json(CreateResponse { session_id })))
}

async fn session_summary(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionSummary> {
    Ok(Json(store.read(&id, |s| SessionSummary {
        session_id: s.id().to_owned(),
        model_id: s.model_id().to_owned(),
        status: s.status(),
        generation: s.generation(),
        population_size: s.population().len(),
        ratio: s.ratio(),
        created_ms: s.created_ms(),
        updated_ms: s.updated_ms(),
    })?))
}

async fn get_generation(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<GenerationResponse> {
    let (model_id, generation, latents) = store.current_latents(&id)?;
    let pngs = render_pngs(store.clone(), model_id, latents).await?;
    let images = pngs.into_iter().enumerate().map(|(index, png_base64)| EncodedImage { index, png_base64 }).collect();
    Ok(Json(GenerationResponse { generation, images }))
}

async fn advance(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<AdvanceRequest>, JsonRejection>,
) -> ApiResult<AdvanceResponse> {
    let Json(req) = body?;
    let generation =
        store.update(&id, |s| s.advance(&req.selected, req.mutation_std, req.expected_generation, now_ms()))?;
    Ok(Json(AdvanceResponse { generation }))
}

async fn start_review(State(store): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<ReviewStarted> {
    let req: ReviewRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ReviewRequest::default()
    } else {
        serde_json::from_slice(&body).map_err(|e| SessionError::Validation(format!("invalid review request: {e}")))?
    };
    let entries = store.update(&id, |s| {
        s.start_review(req.expected_generation, req.seed, now_ms()).map(|r| r.entries.len())
    })?;
    Ok(Json(ReviewStarted { entries }))
}

async fn get_review(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<ReviewResponse> {
    let (model_id, latents, pick) = store.review_latents(&id)?;
    let status = store.read(&id, |s| s.status())?;
    let pngs = render_pngs(store.clone(), model_id, latents).await?;
    let images = pngs.into_iter().enumerate().map(|(position, png_base64)| ReviewImage { position, png_base64 }).collect();
    Ok(Json(ReviewResponse { status, images, pick }))
}

async fn submit_best(
    State(store): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<BestRequest>, JsonRejection>,
) -> ApiResult<BestResponse> {
    let Json(req) = body?;
    let ratio = store.update(&id, |s| s.submit_best(req.position, now_ms()))?;
    Ok(Json(BestResponse { ratio }))
}

async fn history(State(store): State<AppState>, Path(id): Path<String>) -> ApiResult<HistoryResponse> {
    Ok(Json(store.read(&id, |s| HistoryResponse {
        session_id: s.id().to_owned(),
        model_id: s.model_id().to_owned(),
        seed: s.seed(),
        params: *s.params(),
        status: s.status(),
        generation: s.generation(),
        history: s.history().to_vec(),
        review: s.review().cloned(),
        ratio: s.ratio(),
    })?))
}

async fn render_pngs(store: AppState, model_id: String, latents: Vec<LatentVector>) -> Result<Vec<String>, ApiError> {
    let rendered = tokio::task::spawn_blocking(move || {
        let entry = store.registry().get(&model_id).ok_or_else(|| SessionError::UnknownModel(model_id.clone()))?;
        let images = entry.generator.render(&latents)?;
        Ok::<_, SessionError>(images.iter().map(|img| BASE64.encode(img.to_png())).collect())
    })
    .await
    .map_err(|e| SessionError::Io(std::io::Error::other(e)))?;
    Ok(rendered?)
}
