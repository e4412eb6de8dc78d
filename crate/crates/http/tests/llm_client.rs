mod common;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use axum::extract::State;
use axum::http::{HeaderMap, StatusCode};
use axum::routing::post;
use axum::{Json, Router};
use jiragpt_core::llm::{ChatBackend, ChatRequest, LlmError, Temperature};
use jiragpt_http::OpenAiClient;
use serde_json::{json, Value};

#[derive(Clone, Default)]
struct Stub {
    bodies: Arc<Mutex<Vec<Value>>>,
    auth: Arc<Mutex<Vec<String>>>,
    /// Statuses to answer with before succeeding.
    failures: Arc<Mutex<Vec<u16>>>,
    with_usage: bool,
    delay: Duration,
    in_flight: Arc<AtomicUsize>,
    peak: Arc<AtomicUsize>,
}

async fn completions(State(s): State<Stub>, headers: HeaderMap, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    let now = s.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
    s.peak.fetch_max(now, Ordering::SeqCst);
    tokio::time::sleep(s.delay).await;
    s.in_flight.fetch_sub(1, Ordering::SeqCst);
    s.bodies.lock().unwrap().push(body);
    if let Some(h) = headers.get("authorization") {
        s.auth.lock().unwrap().push(h.to_str().unwrap().to_string());
    }
    let fail = {
        let mut f = s.failures.lock().unwrap();
        (!f.is_empty()).then(|| f.remove(0))
    };
    if let Some(status) = fail {
        return (StatusCode::from_u16(status).unwrap(), Json(json!({"error": {"message": "nope"}})));
    }
    let mut out = json!({
        "id": "cmpl-1",
        "model": "gpt-3.5-turbo-0613",
        "choices": [{"index": 0, "message": {"role": "assistant", "content": "status = Abierto"}}],
    });
    if s.with_usage {
        out["usage"] = json!({"prompt_tokens": 44, "completion_tokens": 12, "total_tokens": 56});
    }
    (StatusCode::OK, Json(out))
}

fn start(stub: Stub) -> String {
    common::spawn(Router::new().route("/v1/chat/completions", post(completions)).with_state(stub))
}

fn request(t: f64) -> ChatRequest {
    ChatRequest::new("gpt-3.5-turbo", Temperature::new(t).unwrap(), "sys", "Muestra las incidencias abiertas")
}

fn client(base: &str) -> OpenAiClient {
    OpenAiClient::new(base, Some("sk-test".into())).with_backoff(Duration::from_millis(5))
}

#[test]
fn reports_upstream_usage_and_sends_temperature() {
    let stub = Stub {
        with_usage: true,
        ..Stub::default()
    };
    let base = start(stub.clone());
    let r = client(&base).complete(&request(0.7)).unwrap();
    assert_eq!(r.content, "status = Abierto");
    assert_eq!((r.prompt_tokens, r.completion_tokens), (44, 12));
    assert!(!r.estimated);
    assert_eq!(r.model, "gpt-3.5-turbo-0613");
    let body = &stub.bodies.lock().unwrap()[0];
    assert_eq!(body["temperature"], json!(0.7));
    assert_eq!(body["model"], "gpt-3.5-turbo");
    assert_eq!(body["messages"][0]["role"], "system");
    assert_eq!(body["messages"][1]["content"], "Muestra las incidencias abiertas");
    assert!(body.get("max_tokens").is_none());
    assert_eq!(stub.auth.lock().unwrap()[0], "Bearer sk-test");
}

#[test]
fn estimates_when_usage_missing() {
    let base = start(Stub::default());
    let r = client(&base).complete(&request(0.0)).unwrap();
    assert!(r.estimated);
    assert_eq!(r.completion_tokens, 4);
}

#[test]
fn retries_transient_failures() {
    let stub = Stub {
        failures: Arc::new(Mutex::new(vec![500, 429])),
        ..Stub::default()
    };
    let base = start(stub.clone());
    assert!(client(&base).complete(&request(0.0)).is_ok());
    assert_eq!(stub.bodies.lock().unwrap().len(), 3);
}

#[test]
fn gives_up_after_three_attempts() {
    let stub = Stub {
        failures: Arc::new(Mutex::new(vec![429; 5])),
        ..Stub::default()
    };
    let base = start(stub.clone());
    assert_eq!(client(&base).complete(&request(0.0)).unwrap_err(), LlmError::RateLimited);
    assert_eq!(stub.bodies.lock().unwrap().len(), 3);
}

#[test]
fn auth_errors_are_not_retried() {
    let stub = Stub {
        failures: Arc::new(Mutex::new(vec![401])),
        ..Stub::default()
    };
    let base = start(stub.clone());
    assert_eq!(client(&base).complete(&request(0.0)).unwrap_err(), LlmError::Auth(401));
    assert_eq!(stub.bodies.lock().unwrap().len(), 1);
}

#[test]
fn unreachable_backend() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    drop(listener);
    let err = client(&format!("http://{addr}")).complete(&request(0.0)).unwrap_err();
    assert_eq!(err.code(), "BACKEND_UNREACHABLE");
}

#[test]
fn concurrency_is_capped() {
    let stub = Stub {
        delay: Duration::from_millis(60),
        ..Stub::default()
    };
    let base = start(stub.clone());
    let c = Arc::new(client(&base).with_max_concurrency(2));
    let handles: Vec<_> = (0..8)
        .map(|_| {
            let c = c.clone();
            thread::spawn(move || c.complete(&request(0.0)).unwrap())
        })
        .collect();
    for h in handles {
        h.join().unwrap();
    }
    assert_eq!(stub.bodies.lock().unwrap().len(), 8);
    assert!(stub.peak.load(Ordering::SeqCst) <= 2);
}
