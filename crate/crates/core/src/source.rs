use thiserror::Error;

use crate::issue::{Issue, SchemaError};
use crate::jql::Query;

#[derive(Debug, Error)]
pub enum JiraError {
    #[error("Jira rejected the query ({status}): {}", messages.join("; "))]
    Rejected { status: u16, messages: Vec<String> },
    #[error("Jira refused the credentials ({0})")]
    Auth(u16),
    #[error("Jira unreachable: {0}")]
    Unreachable(String),
    #[error("unexpected Jira response: {0}")]
    Protocol(String),
    #[error(transparent)]
    Schema(#[from] SchemaError),
}

impl JiraError {
    pub fn code(&self) -> &'static str {
        match self {
            JiraError::Rejected { .. } => "JIRA_REJECTED",
            JiraError::Auth(_) => "JIRA_AUTH",
            JiraError::Unreachable(_) => "JIRA_UNREACHABLE",
            JiraError::Protocol(_) | JiraError::Schema(_) => "JIRA_PROTOCOL",
        }
    }
}

/// Where the pipeline runs its generated JQL.
///
/// Results come back in the query's order, all pages concatenated.
pub trait IssueSource: Send + Sync {
    fn search(&self, query: &Query) -> Result<Vec<Issue>, JiraError>;
}
