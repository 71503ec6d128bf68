use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChatRole {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: ChatRole,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        Self {
            role: ChatRole::Assistant,
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranscriptError {
    #[error("transcript has no messages")]
    Empty,
    #[error("transcript must open with a system or user message")]
    BadOpening,
}

/// Ordered chat messages; nonempty and opened by a system or user turn.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<ChatMessage>", into = "Vec<ChatMessage>")]
pub struct ChatTranscript {
    messages: Vec<ChatMessage>,
}

impl ChatTranscript {
    pub fn new(messages: Vec<ChatMessage>) -> Result<Self, TranscriptError> {
        match messages.first() {
            None => Err(TranscriptError::Empty),
            Some(m) if m.role == ChatRole::Assistant => Err(TranscriptError::BadOpening),
            Some(_) => Ok(Self { messages }),
        }
    }

    /// System prompt followed by one user turn.
    pub fn prompt(system: impl Into<String>, user: impl Into<String>) -> Self {
        Self {
            messages: vec![ChatMessage::system(system), ChatMessage::user(user)],
        }
    }

    pub fn messages(&self) -> &[ChatMessage] {
        &self.messages
    }

    pub fn push(&mut self, message: ChatMessage) {
        self.messages.push(message);
    }

    /// Text of the last user message, if any.
    pub fn last_user(&self) -> Option<&str> {
        self.messages
            .iter()
            .rev()
            .find(|m| m.role == ChatRole::User)
            .map(|m| m.content.as_str())
    }

    /// Stable hex SHA-256 over the role-tagged messages.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        for m in &self.messages {
            let tag: &[u8] = match m.role {
                ChatRole::System => b"s",
                ChatRole::User => b"u",
                ChatRole::Assistant => b"a",
            };
            hasher.update(tag);
            hasher.update((m.content.len() as u64).to_le_bytes());
            hasher.update(m.content.as_bytes());
        }
        hex::encode(hasher.finalize())
    }
}

impl TryFrom<Vec<ChatMessage>> for ChatTranscript {
    type Error = TranscriptError;

    fn try_from(messages: Vec<ChatMessage>) -> Result<Self, Self::Error> {
        Self::new(messages)
    }
}

impl From<ChatTranscript> for Vec<ChatMessage> {
    fn from(t: ChatTranscript) -> Self {
        t.messages
    }
}

/// Sampling parameters sent with every request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub top_p: f64,
}

impl Default for GenerationParams {
    fn default() -> Self {
        Self {
            temperature: 1.0,
            max_tokens: 2048,
            top_p: 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_published_configuration() {
        let p = GenerationParams::default();
        assert_eq!(p.temperature, 1.0);
        assert_eq!(p.max_tokens, 2048);
        assert_eq!(p.top_p, 1.0);
    }

    #[test]
    fn transcript_rejects_empty_and_assistant_opening() {
        assert_eq!(ChatTranscript::new(vec![]), Err(TranscriptError::Empty));
        assert_eq!(
            ChatTranscript::new(vec![ChatMessage::assistant("hi")]),
            Err(TranscriptError::BadOpening)
        );
        assert!(ChatTranscript::new(vec![ChatMessage::user("hi")]).is_ok());
    }

    #[test]
    fn fingerprint_distinguishes_roles_and_boundaries() {
        let a = ChatTranscript::prompt("ab", "c");
        let b = ChatTranscript::prompt("a", "bc");
        let c = ChatTranscript::new(vec![ChatMessage::user("ab"), ChatMessage::user("c")]).unwrap();
        assert_ne!(a.fingerprint(), b.fingerprint());
        assert_ne!(a.fingerprint(), c.fingerprint());
        assert_eq!(a.fingerprint(), ChatTranscript::prompt("ab", "c").fingerprint());
    }

    #[test]
    fn deserialize_enforces_invariants() {
        let bad: Result<ChatTranscript, _> = serde_json::from_str("[]");
        assert!(bad.is_err());
        let ok: ChatTranscript =
            serde_json::from_str(r#"[{"role":"system","content":"x"}]"#).unwrap();
        assert_eq!(ok.messages().len(), 1);
    }
}
