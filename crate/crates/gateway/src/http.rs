use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{ChatProvider, ChatTranscript, Completion, GatewayError, GenerationParams, TokenUsage};

/// Connection settings for a chat-completions compatible endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HttpProviderConfig {
    /// e.g. `https://api.openai.com/v1`; `/chat/completions` is appended.
    pub base_url: String,
    pub model: String,
    /// Environment variable holding the bearer token. `None` sends no
    /// Authorization header (local servers).
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default = "default_concurrency")]
    pub max_concurrent: usize,
}

fn default_timeout() -> u64 {
    120
}

fn default_concurrency() -> usize {
    4
}

struct Permits {
    available: Mutex<usize>,
    freed: Condvar,
}

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            available: Mutex::new(n.max(1)),
            freed: Condvar::new(),
        }
    }

    fn acquire(&self) -> PermitGuard<'_> {
        let mut n = self.available.lock().unwrap();
        while *n == 0 {
            n = self.freed.wait(n).unwrap();
        }
        *n -= 1;
        PermitGuard(self)
    }
}

struct PermitGuard<'a>(&'a Permits);

impl Drop for PermitGuard<'_> {
    fn drop(&mut self) {
        *self.0.available.lock().unwrap() += 1;
        self.0.freed.notify_one();
    }
}

/// Shared HTTP plumbing: credential lookup, concurrency cap, JSON POST.
pub(crate) struct Endpoint {
    config: HttpProviderConfig,
    agent: ureq::Agent,
    permits: Permits,
}

impl Endpoint {
    pub(crate) fn new(config: HttpProviderConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .http_status_as_error(false)
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .build()
            .into();
        let permits = Permits::new(config.max_concurrent);
        Self {
            config,
            agent,
            permits,
        }
    }

    pub(crate) fn config(&self) -> &HttpProviderConfig {
        &self.config
    }

    fn credential(&self) -> Result<Option<String>, GatewayError> {
        match &self.config.api_key_env {
            None => Ok(None),
            Some(var) => match std::env::var(var) {
                Ok(v) if !v.trim().is_empty() => Ok(Some(v)),
                _ => Err(GatewayError::Auth(format!(
                    "environment variable {var} is not set"
                ))),
            },
        }
    }

    /// POSTs `body` to `{base_url}/{path}` and returns the 2xx body text.
    /// The credential is checked before any network activity.
    pub(crate) fn post(&self, path: &str, body: &serde_json::Value) -> Result<String, GatewayError> {
        let key = self.credential()?;
        let url = format!("{}/{path}", self.config.base_url.trim_end_matches('/'));
        let _permit = self.permits.acquire();

        let mut req = self
            .agent
            .post(&url)
            .header("Content-Type", "application/json");
        if let Some(key) = &key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req
            .send_json(body)
            .map_err(|e| GatewayError::Transient(e.to_string()))?;
        let status = resp.status().as_u16();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| GatewayError::Transient(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(GatewayError::from_status(status, text));
        }
        Ok(text)
    }
}

/// Blocking adapter for `POST {base_url}/chat/completions`.
pub struct HttpChatProvider {
    endpoint: Endpoint,
}

#[derive(Deserialize)]
struct WireReply {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<WireUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    content: Option<String>,
}

#[derive(Deserialize)]
struct WireUsage {
    #[serde(default)]
    prompt_tokens: u64,
    #[serde(default)]
    completion_tokens: u64,
}

impl HttpChatProvider {
    pub fn new(config: HttpProviderConfig) -> Self {
        Self {
            endpoint: Endpoint::new(config),
        }
    }

    pub fn config(&self) -> &HttpProviderConfig {
        self.endpoint.config()
    }

    /// Wire body for a request; exposed for inspection in tests.
    pub fn request_body(&self, transcript: &ChatTranscript, params: &GenerationParams) -> serde_json::Value {
        json!({
            "model": self.config().model,
            "messages": transcript.messages(),
            "temperature": params.temperature,
            "max_tokens": params.max_tokens,
            "top_p": params.top_p,
        })
    }
}

pub(crate) fn parse_reply(body: &str) -> Result<Completion, GatewayError> {
    let reply: WireReply =
        serde_json::from_str(body).map_err(|e| GatewayError::MalformedReply(e.to_string()))?;
    let text = reply
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .ok_or_else(|| GatewayError::MalformedReply("no message content in choices".into()))?;
    Ok(Completion {
        text,
        usage: reply.usage.map(|u| TokenUsage {
            prompt_tokens: u.prompt_tokens,
            completion_tokens: u.completion_tokens,
        }),
    })
}

impl ChatProvider for HttpChatProvider {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        params: &GenerationParams,
    ) -> Result<Completion, GatewayError> {
        let body = self.request_body(transcript, params);
        let text = self.endpoint.post("chat/completions", &body)?;
        let completion = parse_reply(&text)?;
        match completion.usage {
            Some(u) => tracing::debug!(
                model = %self.config().model,
                prompt_tokens = u.prompt_tokens,
                completion_tokens = u.completion_tokens,
                "chat completion"
            ),
            None => tracing::debug!(model = %self.config().model, "chat completion (no usage reported)"),
        }
        Ok(completion)
    }

    fn name(&self) -> &str {
        &self.config().model
    }
}
