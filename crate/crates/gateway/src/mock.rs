use std::collections::{HashMap, VecDeque};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use crate::{ChatProvider, ChatTranscript, Completion, GatewayError, GenerationParams};

/// Computes a reply for transcripts the script does not cover.
pub type Responder = Arc<dyn Fn(&ChatTranscript) -> Option<String> + Send + Sync>;

/// Deterministic provider: scripted replies keyed by transcript fingerprint,
/// then an optional responder function, then a fixed default text.
///
/// Failures queued with [`MockProvider::push_failure`] are returned (one per
/// call) before any reply, which lets tests drive retry paths. A provider
/// built with [`MockProvider::always_failing`] never succeeds.
pub struct MockProvider {
    name: String,
    script: HashMap<String, String>,
    responder: Option<Responder>,
    default_text: String,
    failures: Mutex<VecDeque<GatewayError>>,
    permanent_failure: Option<GatewayError>,
    calls: AtomicUsize,
}

impl MockProvider {
    pub fn new(default_text: impl Into<String>) -> Self {
        Self {
            name: "mock".to_string(),
            script: HashMap::new(),
            responder: None,
            default_text: default_text.into(),
            failures: Mutex::new(VecDeque::new()),
            permanent_failure: None,
            calls: AtomicUsize::new(0),
        }
    }

    /// Script keyed by [`ChatTranscript::fingerprint`].
    pub fn from_script(script: HashMap<String, String>, default_text: impl Into<String>) -> Self {
        Self {
            script,
            ..Self::new(default_text)
        }
    }

    pub fn always_failing(error: GatewayError) -> Self {
        Self {
            permanent_failure: Some(error),
            ..Self::new("")
        }
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_responder(mut self, responder: Responder) -> Self {
        self.responder = Some(responder);
        self
    }

    pub fn script_reply(&mut self, transcript: &ChatTranscript, text: impl Into<String>) {
        self.script.insert(transcript.fingerprint(), text.into());
    }

    pub fn push_failure(&self, error: GatewayError) {
        self.failures.lock().unwrap().push_back(error);
    }

    /// Number of `complete` calls so far, failed ones included.
    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl ChatProvider for MockProvider {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        _params: &GenerationParams,
    ) -> Result<Completion, GatewayError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        if let Some(err) = &self.permanent_failure {
            return Err(err.clone());
        }
        if let Some(err) = self.failures.lock().unwrap().pop_front() {
            return Err(err);
        }
        let fp = transcript.fingerprint();
        if let Some(text) = self.script.get(&fp) {
            return Ok(Completion::text(text.clone()));
        }
        if let Some(text) = self.responder.as_ref().and_then(|r| r(transcript)) {
            return Ok(Completion::text(text));
        }
        Ok(Completion::text(self.default_text.clone()))
    }

    fn name(&self) -> &str {
        &self.name
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> GenerationParams {
        GenerationParams::default()
    }

    #[test]
    fn scripted_hit_returns_text_verbatim() {
        let t = ChatTranscript::prompt("sys", "who do you vote for?");
        let mut m = MockProvider::new("VOTE: ABSTAIN");
        m.script_reply(&t, "VOTE: 3\nbecause seat 3 was quiet");
        let out = m.complete(&t, &params()).unwrap();
        assert_eq!(out.text, "VOTE: 3\nbecause seat 3 was quiet");
    }

    #[test]
    fn miss_returns_default() {
        let m = MockProvider::new("VOTE: ABSTAIN");
        let t = ChatTranscript::prompt("sys", "unknown");
        assert_eq!(m.complete(&t, &params()).unwrap().text, "VOTE: ABSTAIN");
    }

    #[test]
    fn identical_calls_identical_replies() {
        let m = MockProvider::new("x").with_responder(Arc::new(|t: &ChatTranscript| {
            Some(format!("len={}", t.last_user().unwrap_or("").len()))
        }));
        let t = ChatTranscript::prompt("sys", "abc");
        let a = m.complete(&t, &params()).unwrap();
        let b = m.complete(&t, &params()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.text, "len=3");
        assert_eq!(m.calls(), 2);
    }

    #[test]
    fn queued_failures_come_first() {
        let m = MockProvider::new("ok");
        m.push_failure(GatewayError::RateLimited { status: 429 });
        let t = ChatTranscript::prompt("s", "u");
        assert!(m.complete(&t, &params()).is_err());
        assert_eq!(m.complete(&t, &params()).unwrap().text, "ok");
    }
}
