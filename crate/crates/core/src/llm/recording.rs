use std::sync::Mutex;

use serde::Serialize;

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError, Phase, Temperature};

/// One completion call as seen by [`RecordingBackend`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CallRecord {
    pub phase: Option<Phase>,
    pub model: String,
    pub temperature: Temperature,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub ok: bool,
}

/// Wraps a backend and logs every call.
pub struct RecordingBackend<B> {
    inner: B,
    log: Mutex<Vec<CallRecord>>,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B) -> Self {
        RecordingBackend {
            inner,
            log: Mutex::new(Vec::new()),
        }
    }

    pub fn calls(&self) -> Vec<CallRecord> {
        self.log.lock().unwrap().clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().unwrap().len()
    }

    pub fn clear(&self) {
        self.log.lock().unwrap().clear();
    }

    pub fn inner(&self) -> &B {
        &self.inner
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        let result = self.inner.complete(request);
        let (prompt_tokens, completion_tokens) = match &result {
            Ok(r) => (r.prompt_tokens, r.completion_tokens),
            Err(_) => (0, 0),
        };
        self.log.lock().unwrap().push(CallRecord {
            phase: request.phase,
            model: request.model.clone(),
            temperature: request.temperature,
            prompt_tokens,
            completion_tokens,
            ok: result.is_ok(),
        });
        result
    }

    fn id(&self) -> String {
        self.inner.id()
    }

    fn deterministic(&self) -> bool {
        self.inner.deterministic()
    }
}
