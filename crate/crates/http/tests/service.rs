mod common;

use jiragpt_http::config::{AppConfig, JiraConfig, LlmConfig};
use jiragpt_http::stack::build_pipeline;
use jiragpt_http::service_router;
use serde_json::{json, Value};

fn golden() -> String {
    let config = AppConfig {
        available_models: vec!["gpt-3.5-turbo".into(), "gpt-4".into()],
        llm: LlmConfig {
            backend: "scripted:golden".into(),
            ..LlmConfig::default()
        },
        jira: JiraConfig {
            embedded: true,
            base_url: "https://jira.example.com/".into(),
            ..JiraConfig::default()
        },
        prices: jiragpt_core::llm::PriceTable::new("USD").with("gpt-3.5-turbo", 0.0015, 0.002),
        ..AppConfig::default()
    };
    config.validate().unwrap();
    let pipeline = build_pipeline(&config).unwrap();
    common::spawn(service_router(pipeline, config))
}

fn post(base: &str, body: Value) -> (u16, Value) {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut resp = agent.post(format!("{base}/api/query")).send_json(body).unwrap();
    (resp.status().as_u16(), resp.body_mut().read_json().unwrap())
}

fn get(url: &str) -> (u16, Value) {
    let mut resp = ureq::get(url).call().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_json().unwrap())
}

#[test]
fn month_count_over_http() {
    let base = golden();
    let (status, body) = post(&base, json!({"text": "¿Cuántas tareas creadas este mes están en progreso?", "complex": true}));
    assert_eq!(status, 200, "{body}");
    assert_eq!(body["jql"], "status = 'En Progreso' AND created = startOfMonth()");
    assert_eq!(body["issues"].as_array().unwrap().len(), 1);
    assert_eq!(body["issues"][0]["key"], "GPT4-15");
    assert_eq!(body["issues"][0]["url"], "https://jira.example.com/browse/GPT4-15");
    assert!(body["answer"].as_str().unwrap().contains('1'));
    assert_eq!(body["usage"]["phases"].as_array().unwrap().len(), 3);
    assert!(body["usage"]["cost"].is_number());
    assert_eq!(body["template"], "full");
    assert_eq!(body["temperature"], 0.0);
}

#[test]
fn basic_open_issues() {
    let base = golden();
    let (status, body) = post(&base, json!({"text": "Muestra las incidencias abiertas", "complex": false}));
    assert_eq!(status, 200);
    assert_eq!(body["issues"].as_array().unwrap().len(), 14);
    assert!(body["answer"].is_null());
    assert!(body["selected_fields"].is_null());
    assert_eq!(body["usage"]["phases"].as_array().unwrap().len(), 1);
}

#[test]
fn identical_requests_identical_bodies() {
    let base = golden();
    let req = json!({"text": "¿Cuántas personas tienen asignadas tareas en el proyecto GPT4?", "complex": true, "template": "B1-3"});
    let a = post(&base, req.clone());
    let b = post(&base, req);
    assert_eq!(a, b);
    assert_eq!(a.1["selected_fields"], json!(["assignee"]));
}

#[test]
fn error_bodies() {
    let base = golden();
    let cases = [
        (json!({"text": "", "complex": false}), 400, "EMPTY_QUERY"),
        (json!({"text": "hola", "temperature": 1.5}), 400, "INVALID_TEMPERATURE"),
        (json!({"text": "hola", "model": "gpt-5"}), 400, "UNKNOWN_MODEL"),
        (json!({"text": "hola", "template": "B2"}), 400, "UNKNOWN_TEMPLATE"),
        (json!({"complex": true}), 400, "INVALID_BODY"),
        (json!({"text": "pregunta sin guion"}), 502, "LLM_UNSCRIPTED"),
    ];
    for (req, status, code) in cases {
        let (got, body) = post(&base, req.clone());
        assert_eq!((got, body["code"].as_str().unwrap()), (status, code), "{req}");
        assert!(body["message"].is_string());
    }
}

#[test]
fn meta_and_health() {
    let base = golden();
    let (status, meta) = get(&format!("{base}/api/meta"));
    assert_eq!(status, 200);
    assert_eq!(meta["templates"], json!(["B1", "B1-2", "B1-3", "full"]));
    assert_eq!(meta["models"].as_array().unwrap().len(), 2);
    assert_eq!(meta["default_temperature"], 0.0);
    let examples = meta["examples"].as_array().unwrap();
    assert!(!examples.is_empty() && examples.iter().all(|e| !e.as_str().unwrap().trim().is_empty()));
    assert_eq!(get(&format!("{base}/health")).0, 200);
}
