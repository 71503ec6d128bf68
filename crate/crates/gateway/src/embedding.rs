use serde::Deserialize;
use serde_json::json;

use crate::http::{Endpoint, HttpProviderConfig};
use crate::GatewayError;

/// Sentence-embedding service.
pub trait EmbeddingProvider: Send + Sync {
    fn embed(&self, text: &str) -> Result<Vec<f64>, GatewayError>;
}

impl<P: EmbeddingProvider + ?Sized> EmbeddingProvider for std::sync::Arc<P> {
    fn embed(&self, text: &str) -> Result<Vec<f64>, GatewayError> {
        (**self).embed(text)
    }
}

/// Adapter for `POST {base_url}/embeddings` in the common wire format.
pub struct HttpEmbeddingProvider {
    endpoint: Endpoint,
}

#[derive(Deserialize)]
struct WireEmbeddings {
    data: Vec<WireEmbedding>,
}

#[derive(Deserialize)]
struct WireEmbedding {
    embedding: Vec<f64>,
}

impl HttpEmbeddingProvider {
    pub fn new(config: HttpProviderConfig) -> Self {
        Self {
            endpoint: Endpoint::new(config),
        }
    }

    pub fn request_body(&self, text: &str) -> serde_json::Value {
        json!({ "model": self.endpoint.config().model, "input": [text] })
    }
}

pub(crate) fn parse_embedding(body: &str) -> Result<Vec<f64>, GatewayError> {
    let reply: WireEmbeddings =
        serde_json::from_str(body).map_err(|e| GatewayError::MalformedReply(e.to_string()))?;
    reply
        .data
        .into_iter()
        .next()
        .map(|d| d.embedding)
        .ok_or_else(|| GatewayError::MalformedReply("no embedding in data".into()))
}

impl EmbeddingProvider for HttpEmbeddingProvider {
    fn embed(&self, text: &str) -> Result<Vec<f64>, GatewayError> {
        let body = self.endpoint.post("embeddings", &self.request_body(text))?;
        parse_embedding(&body)
    }
}
