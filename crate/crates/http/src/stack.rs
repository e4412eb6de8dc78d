//! Wiring a [`Pipeline`] from configuration.

use std::sync::Arc;

use jiragpt_core::eval::{behaviors, Corpus};
use jiragpt_core::fixture::load_fixture;
use jiragpt_core::jql::LintContext;
use jiragpt_core::llm::{ChatBackend, ScriptedBackend};
use jiragpt_core::mockjira::MockJira;
use jiragpt_core::pipeline::Pipeline;
use jiragpt_core::prompt::PromptKit;
use jiragpt_core::source::IssueSource;

use crate::config::{AppConfig, ConfigError, ENV_LLM_API_KEY};
use crate::jira_client::JiraHttpSource;
use crate::llm_client::OpenAiClient;

pub fn load_kit(config: &AppConfig) -> Result<PromptKit, ConfigError> {
    match &config.prompt_blocks_path {
        Some(p) => PromptKit::from_path(p).map_err(|e| ConfigError::Invalid(e.to_string())),
        None => Ok(PromptKit::bundled()),
    }
}

/// `live` or `scripted:<behavior>`. Scripted behaviors are built over
/// `corpus` and seeded with `seed`.
pub fn build_backend(
    spec: &str,
    config: &AppConfig,
    kit: &PromptKit,
    corpus: &Corpus,
    seed: u64,
) -> Result<Arc<dyn ChatBackend>, ConfigError> {
    if spec == "live" {
        let key = config
            .llm_api_key
            .clone()
            .ok_or(ConfigError::MissingCredential(ENV_LLM_API_KEY))?;
        let client = OpenAiClient::new(&config.llm.base_url, Some(key)).with_max_concurrency(config.llm.max_concurrency);
        return Ok(Arc::new(client));
    }
    let name = spec
        .strip_prefix("scripted:")
        .ok_or_else(|| ConfigError::Invalid(format!("unknown backend `{spec}`")))?;
    let behavior = behaviors::by_name(name, corpus, kit, seed).ok_or_else(|| {
        ConfigError::Invalid(format!(
            "unknown scripted behavior `{name}` (expected one of {})",
            behaviors::BEHAVIORS.join(", ")
        ))
    })?;
    Ok(Arc::new(ScriptedBackend::new(behavior)))
}

pub fn build_source(config: &AppConfig) -> Result<(Arc<dyn IssueSource>, LintContext), ConfigError> {
    if config.jira.embedded {
        let jira = match &config.jira.fixture {
            Some(p) => MockJira::new(load_fixture(p).map_err(|e| ConfigError::Invalid(e.to_string()))?),
            None => MockJira::bundled(),
        };
        let lint = jira.fixture().lint_context();
        return Ok((Arc::new(jira), lint));
    }
    let source = JiraHttpSource::new(&config.jira.base_url, config.jira_token.clone());
    let lint = LintContext::new(config.jira.known_projects.iter().cloned(), config.jira.known_users.iter().cloned());
    Ok((Arc::new(source), lint))
}

pub fn build_pipeline(config: &AppConfig) -> Result<Pipeline, ConfigError> {
    let kit = load_kit(config)?;
    let llm = build_backend(&config.llm.backend, config, &kit, &Corpus::bundled(), 0)?;
    let (jira, lint) = build_source(config)?;
    let mut pipeline = Pipeline::new(Arc::new(kit), llm, jira, lint).with_prices(config.prices.clone());
    pipeline.phase3_budget = config.phase3_budget;
    Ok(pipeline)
}
