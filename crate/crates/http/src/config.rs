//! Service configuration: a TOML file for everything except credentials,
//! which only come from the environment.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use jiragpt_core::llm::PriceTable;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const ENV_LLM_API_KEY: &str = "JIRAGPT_LLM_API_KEY";
pub const ENV_LLM_BASE_URL: &str = "JIRAGPT_LLM_BASE_URL";
pub const ENV_JIRA_TOKEN: &str = "JIRAGPT_JIRA_TOKEN";
pub const ENV_MOCKJIRA_TOKEN: &str = "JIRAGPT_MOCKJIRA_TOKEN";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("{0} is not set; the live LLM backend needs it")]
    MissingCredential(&'static str),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LlmConfig {
    /// `live` or `scripted:<behavior>`.
    pub backend: String,
    pub base_url: String,
    pub max_concurrency: usize,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            backend: "live".into(),
            base_url: crate::llm_client::DEFAULT_BASE_URL.into(),
            max_concurrency: crate::llm_client::DEFAULT_MAX_CONCURRENCY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JiraConfig {
    /// Used for search calls and for browse links.
    pub base_url: String,
    /// Serve searches from an in-process mock store instead of `base_url`.
    pub embedded: bool,
    /// Fixture for the embedded store; the bundled one when absent.
    pub fixture: Option<PathBuf>,
    /// Lint context for a remote Jira. The embedded store uses its fixture.
    pub known_projects: Vec<String>,
    pub known_users: Vec<String>,
}

impl Default for JiraConfig {
    fn default() -> Self {
        JiraConfig {
            base_url: "http://127.0.0.1:8081".into(),
            embedded: false,
            fixture: None,
            known_projects: vec!["GPT4".into()],
            known_users: vec!["joel.garcia".into(), "maria.lopez".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AppConfig {
    pub bind: SocketAddr,
    pub default_model: String,
    pub available_models: Vec<String>,
    pub prompt_blocks_path: Option<PathBuf>,
    pub phase3_budget: usize,
    /// `["*"]` allows any origin.
    pub cors_origins: Vec<String>,
    pub example_questions: Vec<String>,
    pub llm: LlmConfig,
    pub jira: JiraConfig,
    pub prices: PriceTable,
    #[serde(skip)]
    pub llm_api_key: Option<String>,
    #[serde(skip)]
    pub jira_token: Option<String>,
}

impl Default for AppConfig {
    fn default() -> Self {
        AppConfig {
            bind: "127.0.0.1:8080".parse().unwrap(),
            default_model: "gpt-3.5-turbo".into(),
            available_models: vec!["gpt-3.5-turbo".into()],
            prompt_blocks_path: None,
            phase3_budget: jiragpt_core::prompt::DEFAULT_PHASE3_BUDGET,
            cors_origins: vec!["*".into()],
            example_questions: vec![
                "Muestra las incidencias abiertas".into(),
                "Muestra las incidencias en progreso en GPT4".into(),
                "¿Cuántas tareas creadas este mes están en progreso?".into(),
                "¿Cuántas personas tienen asignadas tareas en el proyecto GPT4?".into(),
            ],
            llm: LlmConfig::default(),
            jira: JiraConfig::default(),
            prices: PriceTable::default(),
            llm_api_key: None,
            jira_token: None,
        }
    }
}

impl AppConfig {
    pub fn from_toml(text: &str, origin: &Path) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: origin.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Reads `path` if given, else the defaults, then applies the environment.
    pub fn load(path: Option<&Path>) -> Result<Self, ConfigError> {
        let mut config = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|source| ConfigError::Io {
                    path: p.to_path_buf(),
                    source,
                })?;
                AppConfig::from_toml(&text, p)?
            }
            None => AppConfig::default(),
        };
        config.apply_env(|k| std::env::var(k).ok());
        config.validate()?;
        Ok(config)
    }

    pub fn apply_env(&mut self, var: impl Fn(&str) -> Option<String>) {
        let set = |k: &str| var(k).filter(|v| !v.trim().is_empty());
        self.llm_api_key = set(ENV_LLM_API_KEY);
        self.jira_token = set(ENV_JIRA_TOKEN);
        if let Some(url) = set(ENV_LLM_BASE_URL) {
            self.llm.base_url = url;
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.available_models.is_empty() {
            return invalid("available_models is empty".into());
        }
        if !self.available_models.contains(&self.default_model) {
            return invalid(format!("default_model `{}` is not in available_models", self.default_model));
        }
        if self.example_questions.is_empty() || self.example_questions.iter().any(|q| q.trim().is_empty()) {
            return invalid("example_questions must be non-empty and contain no blank entries".into());
        }
        if self.llm.backend != "live" && !self.llm.backend.starts_with("scripted:") {
            return invalid(format!("llm.backend `{}` is neither `live` nor `scripted:<behavior>`", self.llm.backend));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_file_parses() {
        let text = include_str!("../../../config/jiragpt.example.toml");
        let c = AppConfig::from_toml(text, Path::new("example")).unwrap();
        c.validate().unwrap();
        assert!(c.available_models.len() >= 2);
        assert!(c.prices.models.contains_key(&c.default_model));
    }

    #[test]
    fn credentials_rejected_in_file() {
        let err = AppConfig::from_toml("llm_api_key = \"sk-123\"", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("unknown field"), "{err}");
    }

    #[test]
    fn env_overrides() {
        let mut c = AppConfig::default();
        c.apply_env(|k| match k {
            ENV_LLM_API_KEY => Some("sk-test".into()),
            ENV_LLM_BASE_URL => Some("http://localhost:9999".into()),
            _ => None,
        });
        assert_eq!(c.llm_api_key.as_deref(), Some("sk-test"));
        assert_eq!(c.llm.base_url, "http://localhost:9999");
        assert_eq!(c.jira_token, None);
    }

    #[test]
    fn default_model_must_be_available() {
        let c = AppConfig {
            default_model: "gpt-4".into(),
            ..AppConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
