mod common;

use jiragpt_core::jql::parse_jql;
use jiragpt_core::mockjira::MockJira;
use jiragpt_core::source::{IssueSource, JiraError};
use jiragpt_http::{mock_jira_router, JiraHttpSource};
use serde_json::Value;

fn get(url: &str, token: Option<&str>) -> (u16, Value) {
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut req = agent.get(url);
    if let Some(t) = token {
        req = req.header("Authorization", &format!("Bearer {t}"));
    }
    let mut resp = req.call().unwrap();
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_json().unwrap())
}

#[test]
fn search_totals_and_errors() {
    let base = common::spawn(mock_jira_router(MockJira::bundled(), None));
    let (status, body) = get(&format!("{base}/rest/api/2/search?jql=status%20%3D%20%22Abierto%22"), None);
    assert_eq!(status, 200);
    assert_eq!(body["total"], 14);
    assert_eq!(body["maxResults"], 50);
    assert_eq!(body["issues"][0]["fields"]["status"]["name"], "Abierto");

    let (status, body) = get(&format!("{base}/rest/api/2/search?jql=project%20%3D%20NOSUCH"), None);
    assert_eq!(status, 200);
    assert_eq!(body["total"], 0);
    assert_eq!(body["issues"].as_array().unwrap().len(), 0);

    let (status, body) = get(&format!("{base}/rest/api/2/search?jql=status%20%3D%3D%3D%20%22Abierto%22"), None);
    assert_eq!(status, 400);
    assert!(body["errorMessages"][0].as_str().unwrap().starts_with("Error in the JQL Query"));

    let (status, _) = get(&format!("{base}/rest/api/2/search?jql=flavour%20%3D%20x"), None);
    assert_eq!(status, 400);
}

#[test]
fn post_search_and_issue_lookup() {
    let base = common::spawn(mock_jira_router(MockJira::bundled(), None));
    let agent: ureq::Agent = ureq::Agent::config_builder().http_status_as_error(false).build().into();
    let mut resp = agent
        .post(format!("{base}/rest/api/2/search"))
        .send_json(serde_json::json!({"jql": "assignee is EMPTY", "startAt": 1, "maxResults": 2}))
        .unwrap();
    let body: Value = resp.body_mut().read_json().unwrap();
    assert_eq!(body["total"], 4);
    assert_eq!(body["issues"].as_array().unwrap().len(), 2);

    let (status, body) = get(&format!("{base}/rest/api/2/issue/gpt4-15"), None);
    assert_eq!(status, 200);
    assert_eq!(body["key"], "GPT4-15");
    let (status, _) = get(&format!("{base}/rest/api/2/issue/GPT4-99"), None);
    assert_eq!(status, 404);
    assert_eq!(get(&format!("{base}/health"), None).0, 200);
}

#[test]
fn bearer_token_enforced() {
    let base = common::spawn(mock_jira_router(MockJira::bundled(), Some("s3cret".into())));
    let url = format!("{base}/rest/api/2/search?jql=");
    assert_eq!(get(&url, None).0, 401);
    assert_eq!(get(&url, Some("wrong")).0, 401);
    assert_eq!(get(&url, Some("s3cret")).0, 200);
    assert_eq!(get(&format!("{base}/health"), None).0, 200);

    let q = parse_jql("project = GPT4").unwrap();
    let err = JiraHttpSource::new(&base, None).search(&q).unwrap_err();
    assert!(matches!(err, JiraError::Auth(401)));
    assert_eq!(JiraHttpSource::new(&base, Some("s3cret".into())).search(&q).unwrap().len(), 20);
}

#[test]
fn http_source_pages_match_store() {
    let jira = MockJira::bundled();
    let base = common::spawn(mock_jira_router(jira.clone(), None));
    for jql in ["project = GPT4", "status = Abierto ORDER BY priority DESC", "assignee = joel.garcia"] {
        let q = parse_jql(jql).unwrap();
        let want: Vec<String> = jira.run(&q).unwrap().into_iter().map(|i| i.key).collect();
        for k in [1, 5, 50] {
            let got: Vec<String> = JiraHttpSource::new(&base, None)
                .with_page_size(k)
                .search(&q)
                .unwrap()
                .into_iter()
                .map(|i| i.key)
                .collect();
            assert_eq!(got, want, "{jql} page size {k}");
        }
        assert_eq!(JiraHttpSource::new(&base, None).search(&q).unwrap(), jira.run(&q).unwrap());
    }
}
