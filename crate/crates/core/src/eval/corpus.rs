use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fixture::Fixture;
use crate::issue::split_key;
use crate::jql::{evaluate, parse_jql, validate};

const BUNDLED: &str = include_str!("../../data/corpus.json");

/// Cases per question type in a complete corpus.
pub const EXPECTED_DISTRIBUTION: [(u8, usize); 3] = [(1, 24), (2, 24), (3, 22)];

/// Which prompt knowledge a case depends on. Drives the scripted ablation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Trait {
    /// Filters on a Spanish status name.
    Status,
    /// Does not name the project.
    NoProject,
    /// Filters on priority.
    Priority,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCase {
    pub id: String,
    pub qtype: u8,
    pub question: String,
    pub reference_jql: String,
    pub expected_keys: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub traits: Vec<Trait>,
    /// What the scripted model answers for a case it cannot solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub miss_jql: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

impl EvalCase {
    pub fn expected_set(&self) -> BTreeSet<&str> {
        self.expected_keys.iter().map(String::as_str).collect()
    }
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("cannot read corpus: {0}")]
    Io(#[from] std::io::Error),
    #[error("corpus is not a JSON array of cases: {0}")]
    Format(#[from] serde_json::Error),
    #[error("corpus invalid: {}", .0.join("; "))]
    Invalid(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub cases: Vec<EvalCase>,
}

impl Corpus {
    /// The 70-question Spanish corpus shipped with the crate.
    pub fn bundled() -> Corpus {
        Corpus::from_json(BUNDLED).expect("bundled corpus is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
        Corpus::from_json(&std::fs::read_to_string(path)?)
    }

    /// Parses and checks structure. Distribution is checked separately by
    /// [`Corpus::distribution_violations`] so small corpora stay usable.
    pub fn from_json(text: &str) -> Result<Corpus, CorpusError> {
        let mut cases: Vec<EvalCase> = serde_json::from_str(text)?;
        cases.sort_by(|a, b| a.id.cmp(&b.id));
        let corpus = Corpus { cases };
        let problems = corpus.violations();
        if problems.is_empty() {
            Ok(corpus)
        } else {
            Err(CorpusError::Invalid(problems))
        }
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn case(&self, id: &str) -> Option<&EvalCase> {
        self.cases.iter().find(|c| c.id == id)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut ids = BTreeSet::new();
        for c in &self.cases {
            if !ids.insert(c.id.as_str()) {
                out.push(format!("duplicate id {}", c.id));
            }
            if !(1..=3).contains(&c.qtype) {
                out.push(format!("{}: qtype {} is not 1, 2 or 3", c.id, c.qtype));
            }
            if c.question.trim().is_empty() {
                out.push(format!("{}: empty question", c.id));
            }
            match parse_jql(&c.reference_jql) {
                Ok(q) => {
                    if let Err(e) = validate(&q) {
                        out.push(format!("{}: reference JQL: {e}", c.id));
                    }
                }
                Err(e) => out.push(format!("{}: reference JQL: {e}", c.id)),
            }
            if let Some(bad) = c.expected_keys.iter().find(|k| split_key(k).is_none()) {
                out.push(format!("{}: malformed key {bad}", c.id));
            }
        }
        out
    }

    /// Deviations from the 24/24/22 split.
    pub fn distribution_violations(&self) -> Vec<String> {
        EXPECTED_DISTRIBUTION
            .iter()
            .filter_map(|&(qtype, want)| {
                let got = self.cases.iter().filter(|c| c.qtype == qtype).count();
                (got != want).then(|| format!("expected {want} type-{qtype} cases, found {got}"))
            })
            .collect()
    }

    /// Cases whose expected keys disagree with their reference JQL on `fixture`.
    pub fn stale_cases(&self, fixture: &Fixture) -> Vec<String> {
        let clock = fixture.clock();
        self.cases
            .iter()
            .filter(|c| {
                let Ok(q) = parse_jql(&c.reference_jql) else {
                    return true;
                };
                match evaluate(&q, &fixture.issues, &clock) {
                    Ok(hits) => {
                        let got: BTreeSet<&str> = hits.iter().map(|i| i.key.as_str()).collect();
                        got != c.expected_set()
                    }
                    Err(_) => true,
                }
            })
            .map(|c| c.id.clone())
            .collect()
    }
}
