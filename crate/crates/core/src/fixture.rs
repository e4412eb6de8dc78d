//! The bundled test project and the loader that checks its invariants.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::issue::{jira_time, Issue};
use crate::jql::{Clock, LintContext};
use crate::vocab::STATUSES;

const BUNDLED: &str = include_str!("../data/fixture.json");

/// Issues in the default state.
pub const EXPECTED_OPEN: usize = 14;
pub const EXPECTED_ISSUES: usize = 20;
pub const EXPECTED_USERS: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Project {
    pub key: String,
    pub name: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fixture {
    pub project: Project,
    pub users: Vec<String>,
    #[serde(with = "jira_time")]
    pub clock: DateTime<Utc>,
    #[serde(default = "default_statuses")]
    pub statuses: Vec<String>,
    pub issues: Vec<Issue>,
}

fn default_statuses() -> Vec<String> {
    STATUSES.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture: {0}")]
    Io(#[from] std::io::Error),
    #[error("fixture is not valid JSON for the fixture schema: {0}")]
    Format(#[from] serde_json::Error),
    #[error("fixture invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

impl Fixture {
    /// The 20-issue GPT4 project shipped with the crate.
    pub fn bundled() -> Fixture {
        Fixture::from_json(BUNDLED).expect("bundled fixture is valid")
    }

    pub fn from_json(text: &str) -> Result<Fixture, FixtureError> {
        let fx: Fixture = serde_json::from_str(text)?;
        let problems = fx.violations();
        if problems.is_empty() {
            Ok(fx)
        } else {
            Err(FixtureError::Invalid(problems))
        }
    }

    pub fn clock(&self) -> Clock {
        Clock::fixed(self.clock)
    }

    pub fn issue(&self, key: &str) -> Option<&Issue> {
        self.issues.iter().find(|i| i.key == key)
    }

    /// Lint against this fixture's project and users.
    pub fn lint_context(&self) -> LintContext {
        LintContext::new([self.project.key.clone()], self.users.iter().cloned())
    }

    pub fn assignees(&self) -> BTreeSet<&str> {
        self.issues.iter().filter_map(|i| i.assignee.as_deref()).collect()
    }

    /// Every broken invariant; empty when the fixture is usable.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.issues.len() != EXPECTED_ISSUES {
            out.push(format!(
                "expected {EXPECTED_ISSUES} issues, found {}",
                self.issues.len()
            ));
        }

        let mut by_status: BTreeMap<&str, usize> = BTreeMap::new();
        for issue in &self.issues {
            *by_status.entry(issue.status.as_str()).or_default() += 1;
        }
        for status in STATUSES {
            let want = if status == STATUSES[0] { EXPECTED_OPEN } else { 1 };
            let got = by_status.get(status).copied().unwrap_or(0);
            if got != want {
                out.push(format!("expected {want} {status}, found {got}"));
            }
        }
        for status in by_status.keys() {
            if !STATUSES.contains(status) {
                out.push(format!("unknown status `{status}`"));
            }
        }

        let assignees = self.assignees();
        if assignees.len() != EXPECTED_USERS {
            out.push(format!(
                "expected {EXPECTED_USERS} distinct assignees, found {}",
                assignees.len()
            ));
        }
        for user in assignees {
            if !self.users.iter().any(|u| u == user) {
                out.push(format!("assignee `{user}` is not a fixture user"));
            }
        }

        let mut seen = BTreeSet::new();
        for issue in &self.issues {
            if !seen.insert(issue.key.as_str()) {
                out.push(format!("duplicate key {}", issue.key));
            }
            if issue.project != self.project.key {
                out.push(format!(
                    "{}: project `{}` is not `{}`",
                    issue.key, issue.project, self.project.key
                ));
            }
            out.extend(issue.violations());
        }
        for n in 1..=self.issues.len() {
            let key = format!("{}-{n}", self.project.key);
            if !seen.contains(key.as_str()) {
                out.push(format!("missing key {key}"));
            }
        }
        out
    }
}

/// Read and check a fixture file.
pub fn load_fixture(path: impl AsRef<Path>) -> Result<Fixture, FixtureError> {
    let text = std::fs::read_to_string(path)?;
    Fixture::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_passes() {
        let fx = Fixture::bundled();
        assert_eq!(fx.issues.len(), 20);
        assert!(fx.violations().is_empty());
        assert_eq!(fx.clock.to_rfc3339(), "2023-10-16T10:00:00+00:00");
    }

    fn mutated(f: impl FnOnce(&mut Fixture)) -> Vec<String> {
        let mut fx = Fixture::bundled();
        f(&mut fx);
        let text = serde_json::to_string(&fx).unwrap();
        match Fixture::from_json(&text) {
            Err(FixtureError::Invalid(v)) => v,
            other => panic!("expected invalid, got {other:?}"),
        }
    }

    #[test]
    fn thirteen_open() {
        let problems = mutated(|fx| {
            let i = fx.issues.iter_mut().find(|i| i.status == "Abierto").unwrap();
            i.status = "Reabierto".into();
        });
        assert!(problems.iter().any(|p| p == "expected 14 Abierto, found 13"), "{problems:?}");
        assert!(problems.iter().any(|p| p == "expected 1 Reabierto, found 2"));
    }

    #[test]
    fn duplicate_key() {
        let problems = mutated(|fx| fx.issues[3].key = "GPT4-3".into());
        assert!(problems.iter().any(|p| p == "duplicate key GPT4-3"), "{problems:?}");
        assert!(problems.iter().any(|p| p == "missing key GPT4-4"));
    }

    #[test]
    fn round_trips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fx.json");
        std::fs::write(&path, serde_json::to_string_pretty(&Fixture::bundled()).unwrap()).unwrap();
        assert_eq!(load_fixture(&path).unwrap(), Fixture::bundled());
    }
}
