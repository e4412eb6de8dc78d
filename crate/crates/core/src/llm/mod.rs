//! Chat-completion abstraction shared by the HTTP client and the scripted
//! backend.

mod cost;
mod recording;
pub mod scripted;

use std::fmt;
use std::time::Duration;

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

pub use cost::{estimate_cost, Cost, ModelPrice, PriceTable};
pub use recording::{CallRecord, RecordingBackend};
pub use scripted::{Fault, Matcher, NoiseCurve, Rule, ScriptedBackend, ScriptedBehavior};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn system(content: impl Into<String>) -> Self {
        Message {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Message {
            role: Role::User,
            content: content.into(),
        }
    }
}

/// Sampling temperature, always within `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Default)]
#[serde(transparent)]
pub struct Temperature(f64);

impl Temperature {
    pub const ZERO: Temperature = Temperature(0.0);

    pub fn new(t: f64) -> Result<Self, LlmError> {
        if (0.0..=1.0).contains(&t) {
            Ok(Temperature(t))
        } else {
            Err(LlmError::InvalidTemperature(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The eleven sweep points 0.0, 0.1, ..., 1.0.
    pub fn sweep() -> Vec<Temperature> {
        (0..=10).map(|i| Temperature(i as f64 / 10.0)).collect()
    }
}

impl fmt::Display for Temperature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.1}", self.0)
    }
}

impl<'de> Deserialize<'de> for Temperature {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Temperature::new(f64::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// Pipeline phase a request belongs to. Never sent over the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "3")]
    Three,
}

impl Phase {
    pub fn number(self) -> u8 {
        match self {
            Phase::One => 1,
            Phase::Two => 2,
            Phase::Three => 3,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "phase {}", self.number())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: Temperature,
    pub messages: Vec<Message>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(skip)]
    pub phase: Option<Phase>,
}

impl ChatRequest {
    /// `[system, user]`, the shape every phase uses.
    pub fn new(model: impl Into<String>, temperature: Temperature, system: &str, user: &str) -> Self {
        ChatRequest {
            model: model.into(),
            temperature,
            messages: vec![Message::system(system), Message::user(user)],
            max_tokens: None,
            phase: None,
        }
    }

    pub fn in_phase(mut self, phase: Phase) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn system_text(&self) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == Role::System)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    pub fn last_user(&self) -> &str {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == Role::User)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    pub fn prompt_text_len(&self) -> usize {
        self.messages.iter().map(|m| m.content.chars().count()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChatResponse {
    pub content: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub model: String,
    #[serde(with = "millis")]
    pub latency: Duration,
    /// Token counts come from [`estimate_tokens`], not from the backend.
    pub estimated: bool,
}

mod millis {
    use std::time::Duration;

    use serde::Serializer;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LlmError {
    #[error("LLM backend rejected the credentials (HTTP {0})")]
    Auth(u16),
    #[error("LLM backend rate limited the request after retries")]
    RateLimited,
    #[error("LLM backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("LLM backend returned an empty completion")]
    EmptyCompletion,
    #[error("temperature {0} is outside [0, 1]")]
    InvalidTemperature(f64),
    #[error("unexpected LLM response: {0}")]
    Protocol(String),
    #[error("no scripted response for: {0}")]
    Unscripted(String),
}

impl LlmError {
    pub fn code(&self) -> &'static str {
        match self {
            LlmError::Auth(_) => "LLM_AUTH",
            LlmError::RateLimited => "LLM_RATE_LIMITED",
            LlmError::BackendUnreachable(_) => "BACKEND_UNREACHABLE",
            LlmError::EmptyCompletion => "EMPTY_COMPLETION",
            LlmError::InvalidTemperature(_) => "INVALID_TEMPERATURE",
            LlmError::Protocol(_) => "LLM_PROTOCOL",
            LlmError::Unscripted(_) => "LLM_UNSCRIPTED",
        }
    }
}

/// A chat-completion provider. Implementations must tolerate concurrent
/// calls.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError>;

    /// Short label used in reports.
    fn id(&self) -> String;

    /// Whether identical requests always produce identical responses.
    fn deterministic(&self) -> bool {
        false
    }
}

impl<T: ChatBackend + ?Sized> ChatBackend for std::sync::Arc<T> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        (**self).complete(request)
    }

    fn id(&self) -> String {
        (**self).id()
    }

    fn deterministic(&self) -> bool {
        (**self).deterministic()
    }
}

/// Rough token count: one token per four characters, rounded up.
pub fn estimate_tokens(text: &str) -> u64 {
    text.chars().count().div_ceil(4) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn token_estimates() {
        assert_eq!(estimate_tokens(""), 0);
        assert_eq!(estimate_tokens("abcd"), 1);
        assert_eq!(estimate_tokens("abcde"), 2);
        assert_eq!(estimate_tokens("ññññ"), 1);
    }

    #[test]
    fn temperature_range() {
        assert!(Temperature::new(0.0).is_ok());
        assert!(Temperature::new(1.0).is_ok());
        assert_eq!(Temperature::new(1.2), Err(LlmError::InvalidTemperature(1.2)));
        assert!(serde_json::from_str::<Temperature>("-0.1").is_err());
        let sweep = Temperature::sweep();
        assert_eq!(sweep.len(), 11);
        assert_eq!(sweep[8].to_string(), "0.8");
    }

    #[test]
    fn wire_shape_omits_phase() {
        let req = ChatRequest::new("m", Temperature::new(0.3).unwrap(), "sys", "hi").in_phase(Phase::Two);
        let body = serde_json::to_value(&req).unwrap();
        assert_eq!(
            body,
            serde_json::json!({
                "model": "m",
                "temperature": 0.3,
                "messages": [
                    {"role": "system", "content": "sys"},
                    {"role": "user", "content": "hi"}
                ]
            })
        );
    }
}
