//! The query API: `POST /api/query`, `GET /api/meta`, `GET /health`.

use std::collections::BTreeSet;
use std::future::Future;
use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::State;
use axum::http::{HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use jiragpt_core::issue::Issue;
use jiragpt_core::jql::Field;
use jiragpt_core::llm::Temperature;
use jiragpt_core::pipeline::{account, CostSummary, Mode, Pipeline, PipelineError, QuerySpec, Warning};
use jiragpt_core::prompt::Variant;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::net::TcpListener;
use tower_http::cors::{AllowOrigin, Any, CorsLayer};

use crate::config::AppConfig;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QueryBody {
    pub text: String,
    #[serde(default)]
    pub complex: bool,
    pub temperature: Option<f64>,
    pub model: Option<String>,
    pub template: Option<String>,
}

#[derive(Debug, Serialize)]
pub struct IssueView {
    #[serde(flatten)]
    pub issue: Issue,
    pub url: String,
}

#[derive(Debug, Serialize)]
pub struct QueryResponse {
    pub mode: Mode,
    pub model: String,
    pub template: Variant,
    pub temperature: Temperature,
    pub answer: Option<String>,
    pub jql: String,
    pub issues: Vec<IssueView>,
    pub selected_fields: Option<BTreeSet<Field>>,
    pub usage: CostSummary,
    pub warnings: Vec<Warning>,
    pub retry_count: u8,
}

#[derive(Debug, Serialize)]
pub struct Meta {
    pub models: Vec<String>,
    pub default_model: String,
    pub templates: Vec<&'static str>,
    pub default_template: &'static str,
    pub examples: Vec<String>,
    pub default_temperature: f64,
}

/// Error body: `{code, message}` plus raw completions when JQL generation failed.
#[derive(Debug)]
pub struct ApiError {
    pub status: StatusCode,
    pub code: &'static str,
    pub message: String,
    pub completions: Option<Vec<String>>,
}

impl ApiError {
    fn bad_request(code: &'static str, message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code,
            message: message.into(),
            completions: None,
        }
    }
}

impl From<PipelineError> for ApiError {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::Prompt(_) => StatusCode::BAD_REQUEST,
            PipelineError::JqlGenerationFailed { .. } => StatusCode::UNPROCESSABLE_ENTITY,
            PipelineError::Jira(_) | PipelineError::Llm(_) | PipelineError::AnswerGenerationFailed => {
                StatusCode::BAD_GATEWAY
            }
        };
        let completions = match &e {
            PipelineError::JqlGenerationFailed { completions, .. } => Some(completions.clone()),
            _ => None,
        };
        ApiError {
            status,
            code: e.code(),
            message: e.to_string(),
            completions,
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "code": self.code, "message": self.message });
        if let Some(c) = self.completions {
            body["completions"] = json!(c);
        }
        (self.status, Json(body)).into_response()
    }
}

#[derive(Clone)]
struct AppState {
    pipeline: Arc<Pipeline>,
    config: Arc<AppConfig>,
}

fn to_spec(body: QueryBody, config: &AppConfig) -> Result<QuerySpec, ApiError> {
    if body.text.trim().is_empty() {
        return Err(ApiError::bad_request("EMPTY_QUERY", "the query text is empty"));
    }
    let temperature = Temperature::new(body.temperature.unwrap_or(0.0))
        .map_err(|e| ApiError::bad_request("INVALID_TEMPERATURE", e.to_string()))?;
    let model = body.model.unwrap_or_else(|| config.default_model.clone());
    if !config.available_models.contains(&model) {
        return Err(ApiError::bad_request("UNKNOWN_MODEL", format!("model `{model}` is not available")));
    }
    let variant = match body.template {
        Some(t) => t
            .parse::<Variant>()
            .map_err(|e| ApiError::bad_request("UNKNOWN_TEMPLATE", e.to_string()))?,
        None => Variant::Full,
    };
    let mode = if body.complex { Mode::Complex } else { Mode::Basic };
    Ok(QuerySpec::new(body.text, mode, model).temperature(temperature).variant(variant))
}

async fn query(
    State(state): State<AppState>,
    body: Result<Json<QueryBody>, JsonRejection>,
) -> Result<Json<QueryResponse>, ApiError> {
    let Json(body) = body.map_err(|e| ApiError::bad_request("INVALID_BODY", e.body_text()))?;
    let spec = to_spec(body, &state.config)?;
    let pipeline = state.pipeline.clone();
    let run_spec = spec.clone();
    let result = tokio::task::spawn_blocking(move || pipeline.run(&run_spec))
        .await
        .map_err(|e| ApiError {
            status: StatusCode::INTERNAL_SERVER_ERROR,
            code: "INTERNAL",
            message: e.to_string(),
            completions: None,
        })??;
    let usage = account(&result, &spec.model, &state.pipeline.prices);
    let base = state.config.jira.base_url.trim_end_matches('/');
    Ok(Json(QueryResponse {
        mode: spec.mode,
        model: spec.model,
        template: spec.phase1_variant,
        temperature: spec.temperature,
        answer: result.answer_text,
        jql: result.jql,
        issues: result
            .issues
            .into_iter()
            .map(|issue| IssueView {
                url: format!("{base}/browse/{}", issue.key),
                issue,
            })
            .collect(),
        selected_fields: result.selected_fields,
        usage,
        warnings: result.warnings,
        retry_count: result.retry_count,
    }))
}

async fn meta(State(state): State<AppState>) -> Json<Meta> {
    let c = &state.config;
    Json(Meta {
        models: c.available_models.clone(),
        default_model: c.default_model.clone(),
        templates: Variant::ALL.iter().map(|v| v.name()).collect(),
        default_template: Variant::Full.name(),
        examples: c.example_questions.clone(),
        default_temperature: 0.0,
    })
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

fn cors(origins: &[String]) -> CorsLayer {
    let layer = CorsLayer::new().allow_methods(Any).allow_headers(Any);
    if origins.iter().any(|o| o == "*") {
        return layer.allow_origin(Any);
    }
    let list: Vec<HeaderValue> = origins.iter().filter_map(|o| o.parse().ok()).collect();
    layer.allow_origin(AllowOrigin::list(list))
}

pub fn service_router(pipeline: Pipeline, config: AppConfig) -> Router {
    let layer = cors(&config.cors_origins);
    let state = AppState {
        pipeline: Arc::new(pipeline),
        config: Arc::new(config),
    };
    Router::new()
        .route("/api/query", post(query))
        .route("/api/meta", get(meta))
        .route("/health", get(health))
        .layer(layer)
        .with_state(state)
}

/// Serves until `shutdown` resolves, then drains in-flight requests.
pub async fn serve(
    listener: TcpListener,
    router: Router,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router).with_graceful_shutdown(shutdown).await
}

/// Resolves on Ctrl-C or SIGTERM.
pub async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        if let Ok(mut s) = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            s.recv().await;
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    tracing::info!("shutting down");
}
