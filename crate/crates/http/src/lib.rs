//! Network transports around `jiragpt-core`.

pub mod config;
pub mod jira_client;
pub mod llm_client;
pub mod mock_server;
pub mod service;
pub mod stack;

pub use config::AppConfig;
pub use jira_client::JiraHttpSource;
pub use llm_client::OpenAiClient;
pub use mock_server::mock_jira_router;
pub use service::{serve, service_router, shutdown_signal};
