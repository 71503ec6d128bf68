use std::time::Duration;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{ChatProvider, ChatTranscript, Completion, GatewayError, GenerationParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RetryPolicy {
    /// Total attempts, the first one included.
    pub max_attempts: u32,
    pub base_delay_ms: u64,
    pub max_delay_ms: u64,
    /// Relative jitter, e.g. 0.25 for +/-25%.
    pub jitter: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self {
            max_attempts: 3,
            base_delay_ms: 1000,
            max_delay_ms: 30_000,
            jitter: 0.25,
        }
    }
}

/// Delay before retry number `attempt` (0 = first retry).
///
/// `unit_jitter` in `[-1, 1]` scales the configured jitter band, so callers
/// (and tests) control the randomness.
pub fn backoff_delay(policy: &RetryPolicy, attempt: u32, unit_jitter: f64) -> Duration {
    let base = policy
        .base_delay_ms
        .saturating_mul(1u64.checked_shl(attempt).unwrap_or(u64::MAX))
        .min(policy.max_delay_ms) as f64;
    let factor = 1.0 + policy.jitter.clamp(0.0, 1.0) * unit_jitter.clamp(-1.0, 1.0);
    Duration::from_millis((base * factor).round().max(0.0) as u64)
}

/// Retries transient failures (rate limits, 5xx, timeouts) with exponential
/// backoff. Non-retryable errors surface immediately.
pub struct RetryingProvider<P> {
    inner: P,
    policy: RetryPolicy,
}

impl<P: ChatProvider> RetryingProvider<P> {
    pub fn new(inner: P, policy: RetryPolicy) -> Self {
        Self { inner, policy }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: ChatProvider> ChatProvider for RetryingProvider<P> {
    fn complete(
        &self,
        transcript: &ChatTranscript,
        params: &GenerationParams,
    ) -> Result<Completion, GatewayError> {
        let attempts = self.policy.max_attempts.max(1);
        let mut attempt = 0;
        loop {
            match self.inner.complete(transcript, params) {
                Ok(c) => return Ok(c),
                Err(e) if e.is_retryable() && attempt + 1 < attempts => {
                    let jitter = rand::thread_rng().gen_range(-1.0..=1.0);
                    let delay = backoff_delay(&self.policy, attempt, jitter);
                    tracing::warn!(
                        provider = self.inner.name(),
                        attempt = attempt + 1,
                        error = %e,
                        delay_ms = delay.as_millis() as u64,
                        "retrying chat completion"
                    );
                    std::thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e),
            }
        }
    }

    fn name(&self) -> &str {
        self.inner.name()
    }
}
