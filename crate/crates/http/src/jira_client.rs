//! Jira REST v2 search over HTTP.

use std::time::Duration;

use jiragpt_core::issue::{from_jira_json, Issue};
use jiragpt_core::jql::{print_jql, Query};
use jiragpt_core::source::{IssueSource, JiraError};
use serde::Deserialize;
use serde_json::Value as Json;
use ureq::Agent;

pub const PAGE_SIZE: usize = 50;

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct Page {
    total: usize,
    #[serde(default)]
    issues: Vec<Json>,
}

#[derive(Deserialize, Default)]
#[serde(rename_all = "camelCase")]
struct ErrorBody {
    #[serde(default)]
    error_messages: Vec<String>,
}

pub struct JiraHttpSource {
    agent: Agent,
    base_url: String,
    token: Option<String>,
    page_size: usize,
}

impl JiraHttpSource {
    pub fn new(base_url: &str, token: Option<String>) -> Self {
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(30)))
            .build()
            .into();
        JiraHttpSource {
            agent,
            base_url: base_url.trim_end_matches('/').to_string(),
            token,
            page_size: PAGE_SIZE,
        }
    }

    pub fn with_page_size(mut self, n: usize) -> Self {
        self.page_size = n.max(1);
        self
    }

    fn page(&self, jql: &str, start_at: usize) -> Result<Page, JiraError> {
        let mut call = self
            .agent
            .get(format!("{}/rest/api/2/search", self.base_url))
            .query("jql", jql)
            .query("startAt", start_at.to_string())
            .query("maxResults", self.page_size.to_string());
        if let Some(token) = &self.token {
            call = call.header("Authorization", &format!("Bearer {token}"));
        }
        let mut resp = call.call().map_err(|e| JiraError::Unreachable(e.to_string()))?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => resp
                .body_mut()
                .read_json()
                .map_err(|e| JiraError::Protocol(e.to_string())),
            401 | 403 => Err(JiraError::Auth(status)),
            400 => {
                let body: ErrorBody = resp.body_mut().read_json().unwrap_or_default();
                Err(JiraError::Rejected {
                    status,
                    messages: body.error_messages,
                })
            }
            _ => Err(JiraError::Protocol(format!("HTTP {status}"))),
        }
    }
}

impl IssueSource for JiraHttpSource {
    fn search(&self, query: &Query) -> Result<Vec<Issue>, JiraError> {
        let jql = print_jql(query);
        let mut out = Vec::new();
        loop {
            let page = self.page(&jql, out.len())?;
            let got = page.issues.len();
            for raw in &page.issues {
                out.push(from_jira_json(raw)?);
            }
            if got == 0 || out.len() >= page.total {
                return Ok(out);
            }
        }
    }
}
