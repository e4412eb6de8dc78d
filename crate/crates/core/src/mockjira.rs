//! In-memory Jira search over a [`Fixture`].

use std::path::Path;
use std::sync::{Arc, RwLock};

use serde_json::{json, Value as Json};
use thiserror::Error;

use crate::fixture::{load_fixture, Fixture, FixtureError};
use crate::issue::{to_jira_json, Issue};
use crate::jql::{evaluate, parse_jql, EvalError, ParseError, Query};
use crate::source::{IssueSource, JiraError};

pub const DEFAULT_MAX_RESULTS: usize = 50;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("Error in the JQL Query: {0}")]
    Parse(#[from] ParseError),
    #[error("Error in the JQL Query: {0}")]
    Eval(#[from] EvalError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchPage {
    pub start_at: usize,
    pub max_results: usize,
    pub total: usize,
    pub issues: Vec<Issue>,
}

impl SearchPage {
    /// Jira REST v2 search response body.
    pub fn to_json(&self) -> Json {
        json!({
            "startAt": self.start_at,
            "maxResults": self.max_results,
            "total": self.total,
            "issues": self.issues.iter().map(to_jira_json).collect::<Vec<_>>(),
        })
    }
}

/// Thread-safe store. Searches share a read lock; `reload` takes the write
/// lock, so it waits for in-flight searches and swaps the data atomically.
#[derive(Debug, Clone)]
pub struct MockJira {
    state: Arc<RwLock<Arc<Fixture>>>,
}

impl MockJira {
    pub fn new(fixture: Fixture) -> Self {
        MockJira {
            state: Arc::new(RwLock::new(Arc::new(fixture))),
        }
    }

    pub fn bundled() -> Self {
        MockJira::new(Fixture::bundled())
    }

    pub fn fixture(&self) -> Arc<Fixture> {
        self.state.read().expect("fixture lock").clone()
    }

    pub fn reload(&self, fixture: Fixture) {
        *self.state.write().expect("fixture lock") = Arc::new(fixture);
    }

    pub fn reload_from(&self, path: impl AsRef<Path>) -> Result<(), FixtureError> {
        self.reload(load_fixture(path)?);
        Ok(())
    }

    pub fn run(&self, query: &Query) -> Result<Vec<Issue>, EvalError> {
        let fx = self.fixture();
        Ok(evaluate(query, &fx.issues, &fx.clock())?
            .into_iter()
            .cloned()
            .collect())
    }

    /// Parse, evaluate, order, then cut the requested page.
    pub fn search(
        &self,
        jql: &str,
        start_at: usize,
        max_results: usize,
    ) -> Result<SearchPage, SearchError> {
        let query = if jql.trim().is_empty() {
            None
        } else {
            Some(parse_jql(jql)?)
        };
        let all = match query {
            Some(q) => self.run(&q)?,
            None => {
                let fx = self.fixture();
                let mut items: Vec<&Issue> = fx.issues.iter().collect();
                crate::jql::sort_items(&mut items, &[]);
                items.into_iter().cloned().collect()
            }
        };
        let max_results = max_results.max(1);
        let total = all.len();
        let issues = all.into_iter().skip(start_at).take(max_results).collect();
        Ok(SearchPage {
            start_at,
            max_results,
            total,
            issues,
        })
    }

    pub fn get_issue(&self, key: &str) -> Option<Issue> {
        self.fixture()
            .issues
            .iter()
            .find(|i| i.key.eq_ignore_ascii_case(key))
            .cloned()
    }
}

impl IssueSource for MockJira {
    fn search(&self, query: &Query) -> Result<Vec<Issue>, JiraError> {
        self.run(query).map_err(|e| JiraError::Rejected {
            status: 400,
            messages: vec![e.to_string()],
        })
    }
}
