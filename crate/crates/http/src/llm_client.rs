//! Blocking client for OpenAI-compatible chat-completion endpoints.

use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use jiragpt_core::llm::{estimate_tokens, ChatBackend, ChatRequest, ChatResponse, LlmError};
use serde::Deserialize;
use ureq::Agent;

pub const DEFAULT_BASE_URL: &str = "https://api.openai.com";
pub const DEFAULT_MAX_CONCURRENCY: usize = 4;
/// First try plus two retries.
pub const MAX_ATTEMPTS: u32 = 3;

/// Counting semaphore for the concurrent-request cap.
struct Permits {
    free: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Permits {
            free: Mutex::new(n.max(1)),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap();
        while *free == 0 {
            free = self.cv.wait(free).unwrap();
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap() += 1;
        self.0.cv.notify_one();
    }
}

#[derive(Deserialize)]
struct Completion {
    #[serde(default)]
    choices: Vec<Choice>,
    usage: Option<Usage>,
    model: Option<String>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

enum Attempt {
    Done(Result<ChatResponse, LlmError>),
    Transient(LlmError),
}

pub struct OpenAiClient {
    agent: Agent,
    endpoint: String,
    api_key: Option<String>,
    backoff: Duration,
    permits: Permits,
}

impl OpenAiClient {
    /// `base_url` is the server root; requests go to `{base_url}/v1/chat/completions`.
    pub fn new(base_url: &str, api_key: Option<String>) -> Self {
        let agent = Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(120)))
            .build()
            .into();
        OpenAiClient {
            agent,
            endpoint: format!("{}/v1/chat/completions", base_url.trim_end_matches('/')),
            api_key,
            backoff: Duration::from_millis(500),
            permits: Permits::new(DEFAULT_MAX_CONCURRENCY),
        }
    }

    /// Base delay before the first retry; doubles on each further retry.
    pub fn with_backoff(mut self, backoff: Duration) -> Self {
        self.backoff = backoff;
        self
    }

    pub fn with_max_concurrency(mut self, n: usize) -> Self {
        self.permits = Permits::new(n);
        self
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    fn attempt(&self, req: &ChatRequest) -> Attempt {
        let started = Instant::now();
        let mut call = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = match call.send_json(req) {
            Ok(r) => r,
            Err(e) => return Attempt::Transient(LlmError::BackendUnreachable(e.to_string())),
        };
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Attempt::Done(Err(LlmError::Auth(status))),
            429 => return Attempt::Transient(LlmError::RateLimited),
            500..=599 => {
                return Attempt::Transient(LlmError::BackendUnreachable(format!("HTTP {status}")))
            }
            _ => {
                let body = resp.body_mut().read_to_string().unwrap_or_default();
                return Attempt::Done(Err(LlmError::Protocol(format!("HTTP {status}: {body}"))));
            }
        }
        let parsed: Completion = match resp.body_mut().read_json() {
            Ok(c) => c,
            Err(e) => return Attempt::Done(Err(LlmError::Protocol(e.to_string()))),
        };
        let content = parsed
            .choices
            .into_iter()
            .next()
            .and_then(|c| c.message.content)
            .unwrap_or_default();
        if content.trim().is_empty() {
            return Attempt::Done(Err(LlmError::EmptyCompletion));
        }
        let (prompt_tokens, completion_tokens, estimated) = match parsed.usage {
            Some(u) => (u.prompt_tokens, u.completion_tokens, false),
            None => (
                req.messages.iter().map(|m| estimate_tokens(&m.content)).sum(),
                estimate_tokens(&content),
                true,
            ),
        };
        Attempt::Done(Ok(ChatResponse {
            content,
            prompt_tokens,
            completion_tokens,
            model: parsed.model.unwrap_or_else(|| req.model.clone()),
            latency: started.elapsed(),
            estimated,
        }))
    }
}

impl ChatBackend for OpenAiClient {
    fn complete(&self, req: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let _permit = self.permits.acquire();
        let mut last = LlmError::BackendUnreachable("no attempt made".into());
        for attempt in 0..MAX_ATTEMPTS {
            if attempt > 0 {
                thread::sleep(self.backoff * 2u32.pow(attempt - 1));
            }
            match self.attempt(req) {
                Attempt::Done(result) => return result,
                Attempt::Transient(e) => {
                    tracing::warn!(attempt = attempt + 1, error = %e, "chat completion failed");
                    last = e;
                }
            }
        }
        Err(last)
    }

    fn id(&self) -> String {
        format!("live:{}", self.endpoint)
    }
}
