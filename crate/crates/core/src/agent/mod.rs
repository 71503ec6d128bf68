//! Agent decision interface, information-hiding contexts, the answer
//! grammar, deterministic baselines and the model-backed agent.

mod baseline;
mod context;
mod grammar;
mod llm;

pub use baseline::{baseline_policy, heuristic_policy, random_policy, BaselineKind};
pub use context::{build_context, seat_list, AgentContext, ContextError, PrivateObservations};
pub use grammar::{is_keyword_line, parse_response, render_response, ParseError};
pub use llm::{build_prompt, legal_reply, request_footer, LlmAgent, PromptTemplates, TemplateError, MAX_REQUERIES};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use werewolf_gateway::GatewayError;

use crate::game::AgentResponse;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub response: AgentResponse,
    /// The response is the request's default after unusable replies.
    pub fallback: bool,
    /// Model calls spent; 0 for agents without a model.
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum AgentError {
    #[error(transparent)]
    Provider(#[from] GatewayError),
    #[error(transparent)]
    Context(#[from] ContextError),
}

/// Anything that can answer an [`crate::game::ActionRequest`]. Agents may
/// block on network calls and are called from several threads.
pub trait Agent: Send + Sync {
    fn decide(&self, ctx: &AgentContext) -> Result<Decision, AgentError>;

    /// Whether this agent talks to a chat model (and so benefits from a
    /// history summary).
    fn uses_model(&self) -> bool {
        false
    }
}

/// Scripted agent backed by [`baseline_policy`].
#[derive(Debug, Clone, Copy)]
pub struct BaselineAgent {
    pub kind: BaselineKind,
    pub seed: u64,
}

impl Agent for BaselineAgent {
    fn decide(&self, ctx: &AgentContext) -> Result<Decision, AgentError> {
        Ok(Decision {
            response: baseline_policy(self.kind, ctx, self.seed),
            fallback: false,
            attempts: 0,
        })
    }
}
