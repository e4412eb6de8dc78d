//! Jira REST v2 search emulation over a [`MockJira`] store.

use axum::extract::{Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::middleware::{self, Next};
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use jiragpt_core::issue::to_jira_json;
use jiragpt_core::mockjira::{MockJira, DEFAULT_MAX_RESULTS};
use serde::Deserialize;
use serde_json::json;

#[derive(Clone)]
struct MockState {
    jira: MockJira,
    token: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SearchParams {
    #[serde(default)]
    pub jql: String,
    #[serde(default)]
    pub start_at: usize,
    #[serde(default = "default_max")]
    pub max_results: usize,
}

fn default_max() -> usize {
    DEFAULT_MAX_RESULTS
}

fn jira_error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "errorMessages": [message.into()], "errors": {} }))).into_response()
}

fn search(state: &MockState, p: SearchParams) -> Response {
    if p.max_results == 0 {
        return jira_error(StatusCode::BAD_REQUEST, "maxResults must be at least 1");
    }
    match state.jira.search(&p.jql, p.start_at, p.max_results) {
        Ok(page) => Json(page.to_json()).into_response(),
        Err(e) => jira_error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn search_get(State(state): State<MockState>, Query(p): Query<SearchParams>) -> Response {
    search(&state, p)
}

async fn search_post(State(state): State<MockState>, Json(p): Json<SearchParams>) -> Response {
    search(&state, p)
}

async fn issue(State(state): State<MockState>, Path(key): Path<String>) -> Response {
    match state.jira.get_issue(&key) {
        Some(i) => Json(to_jira_json(&i)).into_response(),
        None => jira_error(StatusCode::NOT_FOUND, "Issue does not exist or you do not have permission to see it."),
    }
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

async fn require_token(State(state): State<MockState>, req: Request, next: Next) -> Response {
    if let Some(token) = &state.token {
        let ok = req
            .headers()
            .get(header::AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .is_some_and(|v| v == token);
        if !ok {
            return jira_error(StatusCode::UNAUTHORIZED, "You are not authenticated.");
        }
    }
    next.run(req).await
}

/// Search and issue routes, plus an unauthenticated `/health`.
///
/// With `token` set, API routes need `Authorization: Bearer <token>`.
pub fn mock_jira_router(jira: MockJira, token: Option<String>) -> Router {
    let state = MockState { jira, token };
    let api = Router::new()
        .route("/rest/api/2/search", get(search_get).post(search_post))
        .route("/rest/api/2/issue/{key}", get(issue))
        .route_layer(middleware::from_fn_with_state(state.clone(), require_token));
    api.route("/health", get(health)).with_state(state)
}
