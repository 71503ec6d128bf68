//! Experience memory: embeddings, a cross-game reward-weighted pool, and
//! history summarization used as the retrieval query.

mod embed;
mod pool;
mod summarize;

pub use embed::{cosine, normalize, tokenize, Embedder, HashEmbedder, ServiceEmbedder, HASH_DIM};
pub use pool::{
    parse_pool, retrieval_order, reward_for, Experience, ExperiencePool, ExperienceTags,
    GameOutcomeRecord, RetrievalConfig, Retrieved, TagFilter, POOL_SCHEMA_VERSION, REWARD_BASE,
};
pub use summarize::{ExtractiveSummarizer, LlmSummarizer, Summarizer};

use thiserror::Error;
use werewolf_gateway::GatewayError;

#[derive(Debug, Error)]
pub enum MemoryError {
    #[error("vector dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("experience summary is empty")]
    EmptySummary,
    #[error("nothing to summarize")]
    EmptyTranscript,
    #[error("unknown game {0}")]
    UnknownGame(String),
    #[error("game {0} is already finalized")]
    AlreadyFinalized(String),
    #[error("invalid retrieval config: {0}")]
    InvalidConfig(String),
    #[error("pool file line {line}: {message}")]
    PoolFormat { line: usize, message: String },
    #[error(transparent)]
    Provider(#[from] GatewayError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl PartialEq for MemoryError {
    fn eq(&self, other: &Self) -> bool {
        use MemoryError::*;
        match (self, other) {
            (DimensionMismatch { left: a, right: b }, DimensionMismatch { left: c, right: d }) => a == c && b == d,
            (EmptySummary, EmptySummary) | (EmptyTranscript, EmptyTranscript) => true,
            (UnknownGame(a), UnknownGame(b)) | (AlreadyFinalized(a), AlreadyFinalized(b)) | (InvalidConfig(a), InvalidConfig(b)) => a == b,
            (PoolFormat { line: a, message: m }, PoolFormat { line: b, message: n }) => a == b && m == n,
            _ => false,
        }
    }
}
