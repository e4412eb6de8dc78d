use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use super::ast::{Query, Value};
use super::field::Field;
use crate::vocab::is_english_status;

/// Which language status names are expected in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatusLanguage {
    #[default]
    Spanish,
    English,
}

#[derive(Debug, Clone, Default)]
pub struct LintContext {
    pub known_projects: BTreeSet<String>,
    pub known_users: BTreeSet<String>,
    pub expected_status_language: StatusLanguage,
}

impl LintContext {
    pub fn new<P, U>(projects: P, users: U) -> Self
    where
        P: IntoIterator,
        P::Item: Into<String>,
        U: IntoIterator,
        U::Item: Into<String>,
    {
        LintContext {
            known_projects: projects.into_iter().map(Into::into).collect(),
            known_users: users.into_iter().map(Into::into).collect(),
            expected_status_language: StatusLanguage::Spanish,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LintCode {
    UnknownProject,
    EnglishStatus,
    UnknownUser,
}

impl LintCode {
    pub fn as_str(self) -> &'static str {
        match self {
            LintCode::UnknownProject => "UNKNOWN_PROJECT",
            LintCode::EnglishStatus => "ENGLISH_STATUS",
            LintCode::UnknownUser => "UNKNOWN_USER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LintFinding {
    pub code: LintCode,
    pub field: Field,
    pub value: String,
}

impl fmt::Display for LintFinding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} = {:?}", self.code.as_str(), self.field, self.value)
    }
}

fn contains_ci(set: &BTreeSet<String>, v: &str) -> bool {
    set.iter().any(|s| s.eq_ignore_ascii_case(v) || s.to_lowercase() == v.to_lowercase())
}

/// Flag values that cannot exist in the target Jira.
pub fn lint(query: &Query, ctx: &LintContext) -> Vec<LintFinding> {
    let mut out = Vec::new();
    for clause in query.clauses() {
        for value in clause.values() {
            let Some(text) = (match value {
                Value::Text(_) | Value::Number(_) => value.as_plain_text(),
                _ => None,
            }) else {
                continue;
            };
            let code = match clause.field {
                Field::Project if !contains_ci(&ctx.known_projects, &text) => {
                    Some(LintCode::UnknownProject)
                }
                Field::Status
                    if ctx.expected_status_language == StatusLanguage::Spanish
                        && is_english_status(&text) =>
                {
                    Some(LintCode::EnglishStatus)
                }
                Field::Assignee | Field::Reporter | Field::Creator
                    if !contains_ci(&ctx.known_users, &text) =>
                {
                    Some(LintCode::UnknownUser)
                }
                _ => None,
            };
            if let Some(code) = code {
                out.push(LintFinding {
                    code,
                    field: clause.field,
                    value: text,
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jql::parse_jql;

    fn codes(jql: &str) -> Vec<LintCode> {
        let ctx = LintContext::new(["GPT4"], ["joel.garcia", "maria.lopez"]);
        lint(&parse_jql(jql).unwrap(), &ctx)
            .into_iter()
            .map(|f| f.code)
            .collect()
    }

    #[test]
    fn invented_project() {
        assert_eq!(codes("project = INVENTED1"), vec![LintCode::UnknownProject]);
    }

    #[test]
    fn english_status() {
        assert_eq!(codes("status = \"In Progress\""), vec![LintCode::EnglishStatus]);
        assert_eq!(codes("status in (Open, Abierto)"), vec![LintCode::EnglishStatus]);
    }

    #[test]
    fn clean_query() {
        assert!(codes("project = GPT4 AND status = \"En Progreso\"").is_empty());
        assert!(codes("project = gpt4 AND assignee = Joel.Garcia").is_empty());
    }

    #[test]
    fn unknown_user() {
        assert_eq!(codes("assignee = pedro"), vec![LintCode::UnknownUser]);
    }
}
