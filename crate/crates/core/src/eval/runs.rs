use std::sync::Arc;

use serde::Serialize;

use super::corpus::{Corpus, EvalCase};
use super::scoring::{score_case, Percent, Verdict};
use crate::llm::{estimate_tokens, ChatBackend, Temperature};
use crate::par::{self, Execution};
use crate::pipeline::{Mode, Pipeline, PipelineError, QuerySpec};
use crate::prompt::{PromptTemplate, Variant};

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub model: String,
    /// Stop a run after this many backend failures in a row.
    pub max_consecutive_failures: usize,
    pub execution: Execution,
    /// Cases dispatched together before the failure streak is checked.
    pub chunk_size: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            model: "gpt-3.5-turbo".into(),
            max_consecutive_failures: 5,
            execution: Execution::Parallel,
            chunk_size: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub case_id: String,
    pub qtype: u8,
    pub generated_jql: Option<String>,
    pub returned_keys: Vec<String>,
    pub verdict: Verdict,
    pub error: Option<String>,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl CaseOutcome {
    fn backend_failure(&self) -> bool {
        matches!(self.error.as_deref(), Some(code) if code != "JQL_GENERATION_FAILED")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalRun {
    pub run_id: String,
    pub backend: String,
    pub variant: Variant,
    pub temperature: Temperature,
    pub repetition: u32,
    pub outcomes: Vec<CaseOutcome>,
    pub correct: usize,
    pub total: usize,
    pub accuracy: Percent,
    /// Estimated tokens of the variant's Phase-1 system text.
    pub variant_tokens: u64,
    /// Aborted after too many backend failures in a row.
    pub incomplete: bool,
}

fn run_case(pipeline: &Pipeline, case: &EvalCase, spec: QuerySpec) -> CaseOutcome {
    let result = pipeline.run(&spec);
    let verdict = score_case(case, result.as_ref());
    let usage = match &result {
        Ok(r) => r.phase_usage.as_slice(),
        Err(e) => e.usage(),
    };
    let (generated_jql, returned_keys, error) = match &result {
        Ok(r) => (Some(r.jql.clone()), r.keys().iter().map(|k| k.to_string()).collect(), None),
        Err(e @ PipelineError::JqlGenerationFailed { completions, .. }) => {
            (completions.last().cloned(), Vec::new(), Some(e.code().to_string()))
        }
        Err(e) => (None, Vec::new(), Some(e.code().to_string())),
    };
    CaseOutcome {
        case_id: case.id.clone(),
        qtype: case.qtype,
        generated_jql,
        returned_keys,
        verdict,
        error,
        prompt_tokens: usage.iter().map(|u| u.prompt_tokens).sum(),
        completion_tokens: usage.iter().map(|u| u.completion_tokens).sum(),
    }
}

/// Phase 1 over every case with one template and temperature.
///
/// Cases run concurrently chunk by chunk. Outcomes are kept in case order and
/// the failure streak is checked in that order, so the result does not depend
/// on scheduling.
pub fn run_variant(
    pipeline: &Pipeline,
    corpus: &Corpus,
    variant: Variant,
    temperature: Temperature,
    repetition: u32,
    opts: &RunOptions,
) -> EvalRun {
    let mut outcomes = Vec::with_capacity(corpus.len());
    let mut streak = 0;
    let mut incomplete = false;
    'chunks: for chunk in corpus.cases.chunks(opts.chunk_size.max(1)) {
        let done = par::map(opts.execution, chunk, |case| {
            let spec = QuerySpec::new(&case.question, Mode::Basic, &opts.model)
                .temperature(temperature)
                .variant(variant);
            run_case(pipeline, case, spec)
        });
        for outcome in done {
            streak = if outcome.backend_failure() { streak + 1 } else { 0 };
            outcomes.push(outcome);
            if opts.max_consecutive_failures > 0 && streak >= opts.max_consecutive_failures {
                tracing::warn!(variant = variant.name(), "aborting run after {streak} consecutive backend failures");
                incomplete = true;
                break 'chunks;
            }
        }
    }
    let correct = outcomes.iter().filter(|o| o.verdict == Verdict::Correct).count();
    let system = pipeline.kit.system_text(&PromptTemplate::phase1(variant));
    EvalRun {
        run_id: format!("{}@t{temperature}#r{repetition}", variant.name()),
        backend: pipeline.llm.id(),
        variant,
        temperature,
        repetition,
        correct,
        total: corpus.len(),
        accuracy: Percent::from_ratio(correct as u64, corpus.len() as u64),
        variant_tokens: estimate_tokens(&system),
        outcomes,
        incomplete,
    }
}

/// One run per variant, in the given order.
pub fn run_ablation(
    pipeline: &Pipeline,
    corpus: &Corpus,
    variants: &[Variant],
    temperature: Temperature,
    opts: &RunOptions,
) -> Vec<EvalRun> {
    variants
        .iter()
        .map(|v| run_variant(pipeline, corpus, *v, temperature, 0, opts))
        .collect()
}

/// Mean accuracy at one temperature.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub temperature: Temperature,
    pub repetitions: u32,
    pub mean_accuracy: Percent,
    pub min_accuracy: Percent,
    pub max_accuracy: Percent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub runs: Vec<EvalRun>,
}

/// `repetitions` runs at each temperature. Repetition `r` uses the backend
/// returned by `backend_for(r)`, so seeded backends give a reproducible sweep.
pub fn run_temperature_sweep(
    pipeline: &Pipeline,
    corpus: &Corpus,
    variant: Variant,
    temperatures: &[Temperature],
    repetitions: u32,
    backend_for: &dyn Fn(u32) -> Arc<dyn ChatBackend>,
    opts: &RunOptions,
) -> Sweep {
    let repetitions = repetitions.max(1);
    let mut runs = Vec::new();
    let mut rows = Vec::new();
    for &t in temperatures {
        let here: Vec<EvalRun> = (0..repetitions)
            .map(|r| {
                let mut p = pipeline.clone();
                p.llm = backend_for(r);
                run_variant(&p, corpus, variant, t, r, opts)
            })
            .collect();
        let correct: u64 = here.iter().map(|r| r.correct as u64).sum();
        let total: u64 = here.iter().map(|r| r.total as u64).sum();
        rows.push(SweepRow {
            temperature: t,
            repetitions,
            mean_accuracy: Percent::from_ratio(correct, total),
            min_accuracy: here.iter().map(|r| r.accuracy).min().unwrap_or_default(),
            max_accuracy: here.iter().map(|r| r.accuracy).max().unwrap_or_default(),
        });
        runs.extend(here);
    }
    Sweep { rows, runs }
}
