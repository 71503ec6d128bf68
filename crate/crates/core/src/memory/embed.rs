use werewolf_gateway::EmbeddingProvider;

use super::MemoryError;
use crate::rng::fnv1a64;

/// Bucket count of the built-in embedder.
pub const HASH_DIM: usize = 256;

/// Text → vector. Implementations must be pure: equal text, equal vector.
pub trait Embedder: Send + Sync {
    fn dim(&self) -> Option<usize>;
    fn embed(&self, text: &str) -> Result<Vec<f64>, MemoryError>;
    /// Identifier written into pool files so mismatched embedders are caught.
    fn id(&self) -> String;
}

/// Hashed bag of tokens: lowercase, split on non-alphanumerics, FNV-1a each
/// token into one of 256 buckets, count, L2-normalize. Empty text gives the
/// zero vector.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashEmbedder;

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

impl HashEmbedder {
    pub fn embed_text(text: &str) -> Vec<f64> {
        let mut v = vec![0.0; HASH_DIM];
        for token in tokenize(text) {
            v[(fnv1a64(token.as_bytes()) % HASH_DIM as u64) as usize] += 1.0;
        }
        normalize(&mut v);
        v
    }
}

impl Embedder for HashEmbedder {
    fn dim(&self) -> Option<usize> {
        Some(HASH_DIM)
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, MemoryError> {
        Ok(Self::embed_text(text))
    }

    fn id(&self) -> String {
        "hash-fnv1a-256".to_string()
    }
}

/// Embeddings from an external service, L2-normalized on arrival.
pub struct ServiceEmbedder<P> {
    provider: P,
    label: String,
}

impl<P: EmbeddingProvider> ServiceEmbedder<P> {
    pub fn new(provider: P, label: impl Into<String>) -> Self {
        Self {
            provider,
            label: label.into(),
        }
    }
}

impl<P: EmbeddingProvider> Embedder for ServiceEmbedder<P> {
    fn dim(&self) -> Option<usize> {
        None
    }

    fn embed(&self, text: &str) -> Result<Vec<f64>, MemoryError> {
        let mut v = self.provider.embed(text)?;
        normalize(&mut v);
        Ok(v)
    }

    fn id(&self) -> String {
        format!("service:{}", self.label)
    }
}

/// Scales to unit length in place; the zero vector stays zero.
pub fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, MemoryError> {
    if u.len() != v.len() {
        return Err(MemoryError::DimensionMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let (mut dot, mut nu, mut nv) = (0.0, 0.0, 0.0);
    for (a, b) in u.iter().zip(v) {
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Ok(0.0);
    }
    Ok(dot / (nu.sqrt() * nv.sqrt()))
}
