use werewolf_gateway::{ChatMessage, ChatProvider, ChatTranscript, GenerationParams};

use super::MemoryError;

/// Condenses one seat's view of the game into a single text that is both
/// stored as experience and used as the retrieval query.
pub trait Summarizer: Send + Sync {
    fn summarize(&self, transcript: &[String]) -> Result<String, MemoryError>;
}

/// Model-written summary. The reply may be prefixed with `SUMMARY:`.
pub struct LlmSummarizer<P> {
    provider: P,
    params: GenerationParams,
    instructions: String,
}

impl<P: ChatProvider> LlmSummarizer<P> {
    pub fn new(provider: P, params: GenerationParams, instructions: impl Into<String>) -> Self {
        Self {
            provider,
            params,
            instructions: instructions.into(),
        }
    }

    pub fn transcript_for(&self, lines: &[String]) -> ChatTranscript {
        let mut user = String::from("Game history visible to you:\n");
        for l in lines {
            user.push_str(l);
            user.push('\n');
        }
        user.push_str("---\nREQUEST: summary\n");
        ChatTranscript::new(vec![
            ChatMessage::system(self.instructions.clone()),
            ChatMessage::user(user),
        ])
        .expect("system-first transcript is valid")
    }
}

impl<P: ChatProvider> Summarizer for LlmSummarizer<P> {
    fn summarize(&self, transcript: &[String]) -> Result<String, MemoryError> {
        if transcript.is_empty() {
            return Err(MemoryError::EmptyTranscript);
        }
        let reply = self.provider.complete(&self.transcript_for(transcript), &self.params)?;
        let text = strip_keyword(reply.text.trim(), "summary:").trim().to_string();
        if text.is_empty() {
            return Err(MemoryError::EmptySummary);
        }
        Ok(text)
    }
}

fn strip_keyword<'a>(text: &'a str, keyword: &str) -> &'a str {
    match text.get(..keyword.len()) {
        Some(head) if head.eq_ignore_ascii_case(keyword) => &text[keyword.len()..],
        _ => text,
    }
}

/// Deterministic summary: the last `max_lines` transcript lines joined.
#[derive(Debug, Clone, Copy)]
pub struct ExtractiveSummarizer {
    pub max_lines: usize,
}

impl Default for ExtractiveSummarizer {
    fn default() -> Self {
        Self { max_lines: 8 }
    }
}

impl Summarizer for ExtractiveSummarizer {
    fn summarize(&self, transcript: &[String]) -> Result<String, MemoryError> {
        if transcript.is_empty() {
            return Err(MemoryError::EmptyTranscript);
        }
        let start = transcript.len().saturating_sub(self.max_lines.max(1));
        Ok(transcript[start..].join(" | "))
    }
}
