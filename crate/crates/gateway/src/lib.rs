//! Uniform chat-completion interface used by language-model agents.
//!
//! A [`ChatProvider`] turns a [`ChatTranscript`] plus [`GenerationParams`]
//! into text. Three implementations ship here:
//!
//! - [`MockProvider`]: deterministic scripted replies keyed by transcript
//!   fingerprint, for tests and offline tournaments.
//! - [`HttpChatProvider`]: a generic adapter for any endpoint speaking the
//!   de-facto `/chat/completions` wire format.
//! - [`RetryingProvider`]: wraps any provider with bounded exponential
//!   backoff for transient failures.
//!
//! [`EmbeddingProvider`] is the matching interface for sentence-embedding
//! services used by experience retrieval.

mod embedding;
mod error;
mod http;
mod mock;
mod retry;
mod transcript;

pub use embedding::{EmbeddingProvider, HttpEmbeddingProvider};
pub use error::GatewayError;
pub use http::{HttpChatProvider, HttpProviderConfig};
pub use mock::{MockProvider, Responder};
pub use retry::{backoff_delay, RetryPolicy, RetryingProvider};
pub use transcript::{ChatMessage, ChatRole, ChatTranscript, GenerationParams, TranscriptError};

use serde::{Deserialize, Serialize};

/// Token accounting as reported by the provider, when it reports any.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

/// A single model reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub usage: Option<TokenUsage>,
}

impl Completion {
    pub fn text(text: impl Into<String>) -> Self {
        Self {
            text: text.into(),
            usage: None,
        }
    }
}

/// Anything that can answer a chat transcript.
///
/// Implementations are shared immutable handles; `complete` may be called
/// from several threads at once and must never mutate the transcript.
pub trait ChatProvider: Send + Sync {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        params: &GenerationParams,
    ) -> Result<Completion, GatewayError>;

    /// Short label used in logs.
    fn name(&self) -> &str {
        "provider"
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for std::sync::Arc<P> {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        params: &GenerationParams,
    ) -> Result<Completion, GatewayError> {
        (**self).complete(transcript, params)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}

impl<P: ChatProvider + ?Sized> ChatProvider for Box<P> {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        params: &GenerationParams,
    ) -> Result<Completion, GatewayError> {
        (**self).complete(transcript, params)
    }

    fn name(&self) -> &str {
        (**self).name()
    }
}
