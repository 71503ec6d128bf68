//! Line-delimited game logs.
//!
//! A log starts with one `header` record, followed in game order by `event`
//! records (indices 0, 1, 2, …) interleaved with the `input` records that
//! produced them, and optionally ends with an `aborted` record. Inputs are
//! listed in the order they were submitted: each batch covers the pending
//! requests in ascending seat order.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::game::{AgentResponse, GameConfig, GameEvent, Seat};

pub const LOG_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub schema_version: u32,
    pub game_id: String,
    pub game_index: u64,
    pub game_seed: u64,
    pub experiment_digest: String,
    pub game_config_digest: String,
    pub game_config: GameConfig,
    pub matchup: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    pub seat: Seat,
    pub response: AgentResponse,
    pub fallback: bool,
    pub attempts: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
pub enum LogRecord {
    Header(LogHeader),
    Input(InputRecord),
    Event { index: usize, event: GameEvent },
    Aborted { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogError {
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
    #[error("log is empty")]
    Empty,
}

/// SHA-256 hex of the value's JSON serialization. Struct fields serialize
/// in declaration order and maps are ordered, so equal values give equal
/// digests.
pub fn digest_json<T: Serialize>(value: &T) -> String {
    let bytes = serde_json::to_vec(value).expect("serializable");
    hex::encode(Sha256::digest(&bytes))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GameLog {
    pub records: Vec<LogRecord>,
}

impl GameLog {
    pub fn new(header: LogHeader) -> Self {
        Self {
            records: vec![LogRecord::Header(header)],
        }
    }

    pub fn header(&self) -> &LogHeader {
        match &self.records[0] {
            LogRecord::Header(h) => h,
            _ => unreachable!("first record is the header"),
        }
    }

    pub fn push_input(&mut self, input: InputRecord) {
        self.records.push(LogRecord::Input(input));
    }

    pub fn push_events(&mut self, events: impl IntoIterator<Item = GameEvent>) {
        let mut index = self.events().count();
        for event in events {
            self.records.push(LogRecord::Event { index, event });
            index += 1;
        }
    }

    pub fn abort(&mut self, reason: impl Into<String>) {
        self.records.push(LogRecord::Aborted { reason: reason.into() });
    }

    pub fn events(&self) -> impl Iterator<Item = &GameEvent> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Event { event, .. } => Some(event),
            _ => None,
        })
    }

    pub fn inputs(&self) -> impl Iterator<Item = &InputRecord> {
        self.records.iter().filter_map(|r| match r {
            LogRecord::Input(i) => Some(i),
            _ => None,
        })
    }

    pub fn aborted(&self) -> Option<&str> {
        self.records.iter().find_map(|r| match r {
            LogRecord::Aborted { reason } => Some(reason.as_str()),
            _ => None,
        })
    }

    pub fn is_complete(&self) -> bool {
        self.aborted().is_none() && self.events().any(|e| matches!(e, GameEvent::GameOver { .. }))
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r).expect("records serialize"));
            out.push('\n');
        }
        out
    }

    /// Parses and checks structure: header first and only once, supported
    /// schema version, matching config digest, consecutive event indices,
    /// nothing after `aborted`. Errors carry 1-based line numbers.
    pub fn parse(text: &str) -> Result<Self, LogError> {
        let mut records = Vec::new();
        let mut next_index = 0usize;
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.trim().is_empty() {
                continue;
            }
            let err = |message: String| LogError::Line { line: line_no, message };
            if records.is_empty() {
                // Check the version before the full header shape so that
                // other schema versions get a clear message.
                let raw: serde_json::Value = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
                if raw.get("record").and_then(|v| v.as_str()) != Some("header") {
                    return Err(err("first record must be the header".into()));
                }
                match raw.get("schema_version").and_then(|v| v.as_u64()) {
                    Some(v) if v == u64::from(LOG_SCHEMA_VERSION) => {}
                    Some(v) => {
                        return Err(err(format!(
                            "unsupported schema_version {v}; this build reads version {LOG_SCHEMA_VERSION} only"
                        )))
                    }
                    None => return Err(err("header lacks schema_version".into())),
                }
            }
            let record: LogRecord = serde_json::from_str(line).map_err(|e| err(e.to_string()))?;
            if matches!(records.last(), Some(LogRecord::Aborted { .. })) {
                return Err(err("record after aborted".into()));
            }
            match &record {
                LogRecord::Header(h) => {
                    if !records.is_empty() {
                        return Err(err("duplicate header".into()));
                    }
                    if digest_json(&h.game_config) != h.game_config_digest {
                        return Err(err("game_config_digest does not match game_config".into()));
                    }
                }
                LogRecord::Event { index, .. } => {
                    if *index != next_index {
                        return Err(err(format!("event index {index}, expected {next_index}")));
                    }
                    next_index += 1;
                }
                LogRecord::Input(_) | LogRecord::Aborted { .. } => {}
            }
            records.push(record);
        }
        if records.is_empty() {
            return Err(LogError::Empty);
        }
        Ok(Self { records })
    }
}
