//! HTTP front-end over the [`Pipeline`].
//!
//! | route                     | purpose                                   |
//! |---------------------------|-------------------------------------------|
//! | `POST /analyze`           | full pipeline; `?profile=`, `?refresh=`   |
//! | `POST /extract`           | OCR only                                  |
//! | `GET /examples`           | bundled example list                      |
//! | `GET /examples/{id}/pdf`  | bundled example bytes                     |
//! | `GET /health`             | liveness, never calls providers           |
//!
//! Sources for the POST routes are a multipart upload (field `pdf`) or a
//! JSON body `{"url": ...}` / `{"example_id": ...}`.

mod config;

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tower_http::cors::{Any, CorsLayer};

use crate::ingest::ExampleInfo;
use crate::model::{DocumentSource, InsightReport, SourceLabel, Timings};
use crate::parser::ValidationResult;
use crate::pipeline::{AnalysisOutcome, AnalyzeRequest, Pipeline, PipelineError};
use crate::prompt::DEFAULT_PROFILE_ID;

pub use config::{ModelSetup, OcrSetup, ServiceConfig, StartupError, DEFAULT_CACHE_DIR, DEFAULT_LISTEN};

/// Room for multipart framing on top of the PDF size limit.
const MULTIPART_OVERHEAD: usize = 64 * 1024;

#[derive(Clone)]
pub struct AppState {
    pipeline: Arc<Pipeline>,
    cors_origin: Option<String>,
}

impl AppState {
    pub fn new(pipeline: Arc<Pipeline>) -> Self {
        AppState {
            pipeline,
            cors_origin: None,
        }
    }

    /// Restricts CORS to one origin instead of allowing any.
    pub fn with_cors_origin(mut self, origin: Option<String>) -> Self {
        self.cors_origin = origin;
        self
    }

    pub fn pipeline(&self) -> &Pipeline {
        &self.pipeline
    }
}

#[derive(Debug, Serialize)]
pub struct AnalyzeResponse {
    pub report: InsightReport,
    pub doc_hash: String,
    pub profile_id: String,
    pub model_id: String,
    pub cache_hit: bool,
    pub timings: Timings,
    pub validation: ValidationResult,
    pub grounding_ratio: f64,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExtractResponse {
    pub doc_hash: String,
    pub markdown: String,
    pub structure_index: Vec<SourceLabel>,
}

#[derive(Debug, Deserialize)]
struct AnalyzeQuery {
    profile: Option<String>,
    #[serde(default)]
    refresh: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceBody {
    url: Option<String>,
    example_id: Option<String>,
}

pub struct ApiError(PipelineError);

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let e = self.0;
        let status = match &e {
            PipelineError::BadSource(_) | PipelineError::UnknownProfile(_) => StatusCode::BAD_REQUEST,
            PipelineError::TooLarge { .. } => StatusCode::PAYLOAD_TOO_LARGE,
            PipelineError::StageFailed { .. } => StatusCode::BAD_GATEWAY,
            PipelineError::EmptyExtraction | PipelineError::NoRecognizedSections { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            PipelineError::Timeout { .. } => StatusCode::GATEWAY_TIMEOUT,
            PipelineError::QueueFull => StatusCode::TOO_MANY_REQUESTS,
        };
        let mut body = json!({ "error": e.code(), "message": e.to_string() });
        if let Some(stage) = e.stage() {
            body["stage"] = json!(stage);
        }
        if let PipelineError::NoRecognizedSections { raw_model_text } = &e {
            body["raw_model_text"] = json!(raw_model_text);
        }
        (status, Json(body)).into_response()
    }
}

fn bad_source(message: impl Into<String>) -> ApiError {
    ApiError(PipelineError::BadSource(message.into()))
}

fn body_error(status: StatusCode, message: String, limit: u64) -> ApiError {
    if status == StatusCode::PAYLOAD_TOO_LARGE {
        ApiError(PipelineError::TooLarge { limit })
    } else {
        bad_source(message)
    }
}

async fn read_source(state: &AppState, req: Request) -> Result<DocumentSource, ApiError> {
    let limit = state.pipeline.resolver().max_pdf_bytes();
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|ct| ct.starts_with("multipart/form-data"));

    if is_multipart {
        let mut form = Multipart::from_request(req, &())
            .await
            .map_err(|e| bad_source(e.body_text()))?;
        while let Some(field) = form
            .next_field()
            .await
            .map_err(|e| body_error(e.status(), e.body_text(), limit))?
        {
            if field.name() == Some("pdf") {
                let bytes = field
                    .bytes()
                    .await
                    .map_err(|e| body_error(e.status(), e.body_text(), limit))?;
                return Ok(DocumentSource::UploadBytes(bytes.to_vec()));
            }
        }
        return Err(bad_source("multipart body has no `pdf` field"));
    }

    let bytes = Bytes::from_request(req, &())
        .await
        .map_err(|e| body_error(e.status(), e.body_text(), limit))?;
    let body: SourceBody = serde_json::from_slice(&bytes)
        .map_err(|e| bad_source(format!("expected {{\"url\"}} or {{\"example_id\"}}: {e}")))?;
    match (body.url, body.example_id) {
        (Some(url), None) => Ok(DocumentSource::PublicUrl(url)),
        (None, Some(id)) => Ok(DocumentSource::BundledExample(id)),
        _ => Err(bad_source("give exactly one of `url` or `example_id`")),
    }
}

async fn analyze(
    State(state): State<AppState>,
    Query(query): Query<AnalyzeQuery>,
    req: Request,
) -> Result<Json<AnalyzeResponse>, ApiError> {
    let source = read_source(&state, req).await?;
    let request = AnalyzeRequest {
        source,
        profile_id: query.profile.unwrap_or_else(|| DEFAULT_PROFILE_ID.to_owned()),
        force_refresh: query.refresh,
    };
    let out = state.pipeline.analyze(&request).await?;
    Ok(Json(out.into()))
}

impl From<AnalysisOutcome> for AnalyzeResponse {
    fn from(out: AnalysisOutcome) -> Self {
        AnalyzeResponse {
            report: out.record.report,
            doc_hash: out.record.doc_hash,
            profile_id: out.record.profile_id,
            model_id: out.record.model_id,
            cache_hit: out.cache_hit,
            timings: out.timings,
            validation: out.validation,
            grounding_ratio: out.grounding_ratio,
            created_at: out.record.created_at,
        }
    }
}

async fn extract(
    State(state): State<AppState>,
    req: Request,
) -> Result<Json<ExtractResponse>, ApiError> {
    let source = read_source(&state, req).await?;
    let doc = state.pipeline.extract(&source).await?;
    Ok(Json(ExtractResponse {
        markdown: doc.concatenated_text(),
        doc_hash: doc.doc_hash,
        structure_index: doc.structure_index,
    }))
}

async fn list_examples(State(state): State<AppState>) -> Json<Vec<ExampleInfo>> {
    Json(state.pipeline.resolver().examples().list())
}

async fn example_pdf(State(state): State<AppState>, Path(id): Path<String>) -> Response {
    match state.pipeline.resolver().examples().pdf_bytes(&id) {
        Ok(bytes) => ([(header::CONTENT_TYPE, "application/pdf")], bytes).into_response(),
        Err(crate::ingest::IngestError::UnknownExample(_)) => (
            StatusCode::NOT_FOUND,
            Json(json!({ "error": "unknown-example", "message": format!("no example {id:?}") })),
        )
            .into_response(),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({ "error": "example-io", "message": e.to_string() })),
        )
            .into_response(),
    }
}

async fn health(State(state): State<AppState>) -> Json<serde_json::Value> {
    let p = &state.pipeline;
    Json(json!({
        "status": "ok",
        "versions": {
            "service": env!("CARGO_PKG_VERSION"),
            "profiles": p.profiles().profiles().iter().map(|p| p.id.as_str()).collect::<Vec<_>>(),
        },
        "providers_configured": {
            "ocr": p.extractor_name(),
            "model": p.gateway().model_id(),
        },
    }))
}

pub fn router(state: AppState) -> Router {
    let cors = match state.cors_origin.as_deref().map(HeaderValue::from_str) {
        Some(Ok(origin)) => CorsLayer::new()
            .allow_origin(origin)
            .allow_methods(Any)
            .allow_headers(Any),
        Some(Err(_)) => {
            tracing::warn!("invalid CORS origin; allowing any origin");
            CorsLayer::permissive()
        }
        None => CorsLayer::permissive(),
    };
    let body_limit =
        usize::try_from(state.pipeline.resolver().max_pdf_bytes()).unwrap_or(usize::MAX)
            .saturating_add(MULTIPART_OVERHEAD);
    Router::new()
        .route("/analyze", post(analyze))
        .route("/extract", post(extract))
        .route("/examples", get(list_examples))
        .route("/examples/{id}/pdf", get(example_pdf))
        .route("/health", get(health))
        .layer(DefaultBodyLimit::max(body_limit))
        .layer(cors)
        .with_state(state)
}

/// Builds everything from `cfg` and serves until Ctrl-C.
pub async fn serve(cfg: ServiceConfig) -> Result<(), StartupError> {
    let pipeline = Arc::new(cfg.build_pipeline()?);
    let app = router(AppState::new(pipeline).with_cors_origin(cfg.cors_origin.clone()));
    let listener = tokio::net::TcpListener::bind(cfg.listen_addr)
        .await
        .map_err(|source| StartupError::Bind {
            addr: cfg.listen_addr,
            source,
        })?;
    tracing::info!(addr = %cfg.listen_addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| StartupError::Bind {
            addr: cfg.listen_addr,
            source,
        })
}
