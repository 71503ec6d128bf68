use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum GatewayError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("rate limited by provider (status {status})")]
    RateLimited { status: u16 },
    #[error("transient provider failure: {0}")]
    Transient(String),
    #[error("malformed provider reply: {0}")]
    MalformedReply(String),
    #[error("provider rejected request (status {status}): {body}")]
    Rejected { status: u16, body: String },
}

impl GatewayError {
    /// Whether another attempt could plausibly succeed.
    pub fn is_retryable(&self) -> bool {
        matches!(self, Self::RateLimited { .. } | Self::Transient(_))
    }

    pub(crate) fn from_status(status: u16, body: String) -> Self {
        match status {
            401 | 403 => Self::Auth(format!("status {status}")),
            429 => Self::RateLimited { status },
            500..=599 | 408 => Self::Transient(format!("status {status}")),
            _ => Self::Rejected { status, body },
        }
    }
}
