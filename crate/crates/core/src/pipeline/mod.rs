//! The three-phase question answering workflow.
//!
//! Phase 1 turns the question into JQL and runs it. Complex questions then
//! go through Phase 2 (pick the fields needed) and Phase 3 (answer from the
//! reduced issue JSON).

mod sanitize;

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

pub use sanitize::sanitize_completion;

use crate::issue::{reduce_fields, serialize_reduced, FieldView, Issue};
use crate::jql::{lint, parse_jql, validate, Field, LintContext, LintFinding, Query};
use crate::llm::{
    estimate_cost, ChatBackend, ChatRequest, ChatResponse, Cost, LlmError, Phase, PriceTable,
    Temperature,
};
use crate::prompt::{parse_field_selection, PromptError, PromptKit, Variant, DEFAULT_PHASE3_BUDGET};
use crate::source::{IssueSource, JiraError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize, Default)]
#[serde(rename_all = "UPPERCASE")]
pub enum Mode {
    #[default]
    Basic,
    Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpec {
    pub text: String,
    pub mode: Mode,
    pub temperature: Temperature,
    pub model: String,
    pub phase1_variant: Variant,
}

impl QuerySpec {
    pub fn new(text: impl Into<String>, mode: Mode, model: impl Into<String>) -> Self {
        QuerySpec {
            text: text.into(),
            mode,
            temperature: Temperature::ZERO,
            model: model.into(),
            phase1_variant: Variant::Full,
        }
    }

    pub fn temperature(mut self, t: Temperature) -> Self {
        self.temperature = t;
        self
    }

    pub fn variant(mut self, v: Variant) -> Self {
        self.phase1_variant = v;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseUsage {
    pub phase: Phase,
    pub calls: u32,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub cost: Cost,
    pub estimated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    Lint(LintFinding),
    /// The first completion did not parse or type-check.
    Retried { error: String, completion: String },
    FieldSelectionFallback { completion: String },
    Truncated { kept: usize, total: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryResult {
    pub answer_text: Option<String>,
    pub issues: Vec<Issue>,
    /// The sanitized completion that was executed.
    pub jql: String,
    #[serde(serialize_with = "as_text")]
    pub parsed_jql: Query,
    pub selected_fields: Option<BTreeSet<Field>>,
    pub phase_usage: Vec<PhaseUsage>,
    pub warnings: Vec<Warning>,
    pub retry_count: u8,
}

fn as_text<S: serde::Serializer>(q: &Query, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

impl QueryResult {
    pub fn keys(&self) -> Vec<&str> {
        self.issues.iter().map(|i| i.key.as_str()).collect()
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("could not obtain valid JQL after {} attempt(s): {error}", completions.len())]
    JqlGenerationFailed {
        completions: Vec<String>,
        error: String,
        usage: Vec<PhaseUsage>,
    },
    #[error(transparent)]
    Jira(#[from] JiraError),
    #[error(transparent)]
    Llm(#[from] LlmError),
    #[error("the answer phase returned an empty completion")]
    AnswerGenerationFailed,
}

impl PipelineError {
    pub fn code(&self) -> &'static str {
        match self {
            PipelineError::Prompt(PromptError::EmptyQuery) => "EMPTY_QUERY",
            PipelineError::Prompt(PromptError::UnknownVariant(_)) => "UNKNOWN_TEMPLATE",
            PipelineError::Prompt(_) => "PROMPT_ERROR",
            PipelineError::JqlGenerationFailed { .. } => "JQL_GENERATION_FAILED",
            PipelineError::Jira(e) => e.code(),
            PipelineError::Llm(e) => e.code(),
            PipelineError::AnswerGenerationFailed => "ANSWER_GENERATION_FAILED",
        }
    }

    /// Tokens spent before the failure, where known.
    pub fn usage(&self) -> &[PhaseUsage] {
        match self {
            PipelineError::JqlGenerationFailed { usage, .. } => usage,
            _ => &[],
        }
    }
}

/// Per-phase and total tokens and cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSummary {
    pub currency: String,
    pub phases: Vec<PhaseUsage>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub total_tokens: u64,
    pub cost: Cost,
}

/// Recompute costs from token counts with `prices` and total them.
pub fn account(result: &QueryResult, model: &str, prices: &PriceTable) -> CostSummary {
    let phases: Vec<PhaseUsage> = result
        .phase_usage
        .iter()
        .map(|u| PhaseUsage {
            cost: estimate_cost(u.prompt_tokens, u.completion_tokens, model, prices),
            ..u.clone()
        })
        .collect();
    let prompt_tokens = phases.iter().map(|p| p.prompt_tokens).sum();
    let completion_tokens = phases.iter().map(|p| p.completion_tokens).sum();
    CostSummary {
        currency: prices.currency.clone(),
        cost: phases.iter().map(|p| p.cost).sum(),
        phases,
        prompt_tokens,
        completion_tokens,
        total_tokens: prompt_tokens + completion_tokens,
    }
}

#[derive(Clone)]
pub struct Pipeline {
    pub kit: Arc<PromptKit>,
    pub llm: Arc<dyn ChatBackend>,
    pub jira: Arc<dyn IssueSource>,
    pub lint: LintContext,
    pub prices: PriceTable,
    pub phase3_budget: usize,
}

struct Usage {
    phase: Phase,
    calls: u32,
    prompt: u64,
    completion: u64,
    estimated: bool,
}

impl Usage {
    fn new(phase: Phase) -> Self {
        Usage {
            phase,
            calls: 0,
            prompt: 0,
            completion: 0,
            estimated: false,
        }
    }

    fn add(&mut self, r: &ChatResponse) {
        self.calls += 1;
        self.prompt += r.prompt_tokens;
        self.completion += r.completion_tokens;
        self.estimated |= r.estimated;
    }

    fn finish(self, model: &str, prices: &PriceTable) -> PhaseUsage {
        PhaseUsage {
            phase: self.phase,
            calls: self.calls,
            prompt_tokens: self.prompt,
            completion_tokens: self.completion,
            cost: estimate_cost(self.prompt, self.completion, model, prices),
            estimated: self.estimated,
        }
    }
}

struct Phase1 {
    jql: String,
    query: Query,
    issues: Vec<Issue>,
    usage: PhaseUsage,
    warnings: Vec<Warning>,
    retry_count: u8,
}

impl Pipeline {
    pub fn new(
        kit: Arc<PromptKit>,
        llm: Arc<dyn ChatBackend>,
        jira: Arc<dyn IssueSource>,
        lint: LintContext,
    ) -> Self {
        Pipeline {
            kit,
            llm,
            jira,
            lint,
            prices: PriceTable::default(),
            phase3_budget: DEFAULT_PHASE3_BUDGET,
        }
    }

    pub fn with_prices(mut self, prices: PriceTable) -> Self {
        self.prices = prices;
        self
    }

    pub fn run(&self, spec: &QuerySpec) -> Result<QueryResult, PipelineError> {
        match spec.mode {
            Mode::Basic => self.run_basic(spec),
            Mode::Complex => self.run_complex(spec),
        }
    }

    fn call(&self, spec: &QuerySpec, phase: Phase, system: &str, user: &str) -> Result<ChatResponse, LlmError> {
        let req = ChatRequest::new(&spec.model, spec.temperature, system, user).in_phase(phase);
        self.llm.complete(&req)
    }

    fn phase1(&self, spec: &QuerySpec) -> Result<Phase1, PipelineError> {
        let prompt = self.kit.assemble_phase1(spec.phase1_variant, &spec.text)?;
        let mut usage = Usage::new(Phase::One);
        let mut completions = Vec::new();
        let mut warnings = Vec::new();
        let mut user = prompt.user_text.clone();
        let mut last_error = String::new();
        for attempt in 0..2u8 {
            let response = self.call(spec, Phase::One, &prompt.system_text, &user)?;
            usage.add(&response);
            completions.push(response.content.clone());
            let jql = sanitize_completion(&response.content);
            let checked = parse_jql(&jql)
                .map_err(|e| e.to_string())
                .and_then(|q| validate(&q).map(|_| q).map_err(|e| e.to_string()));
            match checked {
                Ok(query) => {
                    let issues = self.jira.search(&query)?;
                    warnings.extend(lint(&query, &self.lint).into_iter().map(Warning::Lint));
                    return Ok(Phase1 {
                        jql,
                        query,
                        issues,
                        usage: usage.finish(&spec.model, &self.prices),
                        warnings,
                        retry_count: attempt,
                    });
                }
                Err(error) => {
                    tracing::debug!(attempt, %error, completion = %response.content, "JQL rejected");
                    warnings.push(Warning::Retried {
                        error: error.clone(),
                        completion: response.content.clone(),
                    });
                    user = format!(
                        "{}\n\nYour previous answer `{jql}` is not valid JQL: {error}. Reply with the corrected JQL query only.",
                        prompt.user_text
                    );
                    last_error = error;
                }
            }
        }
        Err(PipelineError::JqlGenerationFailed {
            completions,
            error: last_error,
            usage: vec![usage.finish(&spec.model, &self.prices)],
        })
    }

    /// Phase 1 only: generate JQL, run it, return the issues.
    pub fn run_basic(&self, spec: &QuerySpec) -> Result<QueryResult, PipelineError> {
        let p1 = self.phase1(spec)?;
        Ok(QueryResult {
            answer_text: None,
            issues: p1.issues,
            jql: p1.jql,
            parsed_jql: p1.query,
            selected_fields: None,
            phase_usage: vec![p1.usage],
            warnings: p1.warnings,
            retry_count: p1.retry_count,
        })
    }

    /// All three phases. Runs Phases 2 and 3 even when Phase 1 found nothing.
    pub fn run_complex(&self, spec: &QuerySpec) -> Result<QueryResult, PipelineError> {
        let p1 = self.phase1(spec)?;
        let mut warnings = p1.warnings;

        // Phase 2: pick the fields the answer needs
        let prompt = self.kit.assemble_phase2(&spec.text, &Field::ALL)?;
        let response = self.call(spec, Phase::Two, &prompt.system_text, &prompt.user_text)?;
        let mut usage2 = Usage::new(Phase::Two);
        usage2.add(&response);
        let selection = parse_field_selection(&response.content, &Field::ALL.into_iter().collect());
        if selection.fallback {
            warnings.push(Warning::FieldSelectionFallback {
                completion: response.content.clone(),
            });
        }

        // Phase 3: answer from the reduced JSON, truncated to the budget
        let reduced: Vec<_> = p1
            .issues
            .iter()
            .map(|i| reduce_fields(i, &selection.fields))
            .collect();
        let mut kept = reduced.len();
        let mut json = serialize_reduced(&reduced);
        let prompt = loop {
            match self.kit.assemble_phase3(&spec.text, &json, self.phase3_budget) {
                Ok(p) => break p,
                Err(PromptError::TruncationRequired { .. }) if kept > 0 => {
                    kept -= 1;
                    json = serialize_reduced(&reduced[..kept]);
                }
                Err(e) => return Err(e.into()),
            }
        };
        if kept < reduced.len() {
            warnings.push(Warning::Truncated {
                kept,
                total: reduced.len(),
            });
        }
        let response = self.call(spec, Phase::Three, &prompt.system_text, &prompt.user_text)?;
        let mut usage3 = Usage::new(Phase::Three);
        usage3.add(&response);
        let answer = response.content.trim();
        if answer.is_empty() {
            return Err(PipelineError::AnswerGenerationFailed);
        }

        Ok(QueryResult {
            answer_text: Some(answer.to_string()),
            issues: p1.issues,
            jql: p1.jql,
            parsed_jql: p1.query,
            selected_fields: Some(selection.fields),
            phase_usage: vec![
                p1.usage,
                usage2.finish(&spec.model, &self.prices),
                usage3.finish(&spec.model, &self.prices),
            ],
            warnings,
            retry_count: p1.retry_count,
        })
    }
}

/// Keys of `issues` in order; handy for comparisons.
pub fn keys_of<V: FieldView>(issues: &[V]) -> Vec<String> {
    issues.iter().map(|i| i.key().to_string()).collect()
}
