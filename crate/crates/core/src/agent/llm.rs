use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use werewolf_gateway::{ChatMessage, ChatProvider, ChatTranscript, GenerationParams};

use super::context::{seat_list, AgentContext};
use super::grammar::{parse_response, render_response};
use super::{Agent, AgentError, Decision};
use crate::game::{ActionRequest, AgentResponse, Camp, Direction, RequestKind, RequestTag, Seat};
use crate::rng::{fnv1a64, SplitMix64};

/// Re-queries after the first malformed or illegal reply.
pub const MAX_REQUERIES: u32 = 2;

/// Plain-text prompt templates keyed by request kind, plus `system` and
/// `summary`. `{{name}}` placeholders are substituted; unknown ones stay.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplates {
    templates: BTreeMap<String, String>,
}

const BUILTIN: [(&str, &str); 15] = [
    ("system", include_str!("../../templates/system.txt")),
    ("summary", include_str!("../../templates/summary.txt")),
    ("wolf_proposal", include_str!("../../templates/wolf_proposal.txt")),
    ("guard_target", include_str!("../../templates/guard_target.txt")),
    ("seer_target", include_str!("../../templates/seer_target.txt")),
    ("witch_decision", include_str!("../../templates/witch_decision.txt")),
    ("hunter_shot", include_str!("../../templates/hunter_shot.txt")),
    ("election_ballot", include_str!("../../templates/election_ballot.txt")),
    ("speech", include_str!("../../templates/speech.txt")),
    ("pseudo_ballot", include_str!("../../templates/pseudo_ballot.txt")),
    ("sheriff_summary", include_str!("../../templates/sheriff_summary.txt")),
    ("inference", include_str!("../../templates/inference.txt")),
    ("official_ballot", include_str!("../../templates/official_ballot.txt")),
    ("tiebreak_ballot", include_str!("../../templates/tiebreak_ballot.txt")),
    ("speaking_order", include_str!("../../templates/speaking_order.txt")),
];

#[derive(Debug, thiserror::Error)]
pub enum TemplateError {
    #[error("unknown template file {0}; expected one of the request kinds, system or summary")]
    UnknownName(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            templates: BUILTIN.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl PromptTemplates {
    /// Built-ins overridden by every `<name>.txt` in `dir`.
    pub fn with_overrides(dir: &Path) -> Result<Self, TemplateError> {
        let mut t = Self::default();
        let mut entries: Vec<_> = std::fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.path());
        for entry in entries {
            let path = entry.path();
            if path.extension().and_then(|e| e.to_str()) != Some("txt") {
                continue;
            }
            let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            if !t.templates.contains_key(&name) {
                return Err(TemplateError::UnknownName(name));
            }
            t.templates.insert(name, std::fs::read_to_string(&path)?);
        }
        Ok(t)
    }

    pub fn get(&self, name: &str) -> &str {
        self.templates.get(name).map(String::as_str).unwrap_or_default()
    }

    pub fn render(&self, name: &str, vars: &BTreeMap<&str, String>) -> String {
        let mut out = self.get(name).to_string();
        for (k, v) in vars {
            out = out.replace(&format!("{{{{{k}}}}}"), v);
        }
        out
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Machine-readable request footer appended to every prompt.
pub fn request_footer(req: &ActionRequest) -> String {
    let mut s = format!("---\nREQUEST: {}\nLEGAL: {}\n", req.tag().name(), seat_list(&req.legal_targets));
    if let RequestKind::WitchDecision {
        victim,
        heal_available,
        poison_available,
        both_allowed,
    } = &req.kind
    {
        let _ = writeln!(s, "VICTIM: {}", victim.0);
        let _ = writeln!(
            s,
            "POTIONS: heal={} poison={} both={}",
            yes(*heal_available),
            yes(*poison_available),
            yes(*both_allowed)
        );
    }
    s
}

fn template_vars(ctx: &AgentContext) -> BTreeMap<&'static str, String> {
    let mut v = BTreeMap::new();
    v.insert("seat", ctx.seat.0.to_string());
    v.insert("role", ctx.role.name().to_string());
    v.insert("round", ctx.round.to_string());
    v.insert("alive", seat_list(&ctx.alive));
    v.insert("sheriff", ctx.sheriff.map_or("none".into(), |s| format!("seat {}", s.0)));
    v.insert("private", ctx.private_lines().join("\n"));
    let transcript = ctx.transcript_lines();
    v.insert(
        "transcript",
        if transcript.is_empty() {
            "(nothing yet)".into()
        } else {
            transcript.join("\n")
        },
    );
    v.insert(
        "summary",
        ctx.history_summary
            .as_ref()
            .map_or(String::new(), |s| format!("Your summary of the game so far: {s}\n")),
    );
    let experiences = if ctx.retrieved.is_empty() {
        String::new()
    } else {
        let mut s = String::from("Experience from earlier games (higher reward means the player went on to win quickly):\n");
        for r in &ctx.retrieved {
            let _ = writeln!(
                s,
                "- [reward {:.0}, similarity {:.2}] {}",
                r.experience.reward.unwrap_or(0.0),
                r.similarity,
                r.experience.summary.replace('\n', " ")
            );
        }
        s
    };
    v.insert("experiences", experiences);
    match &ctx.request.kind {
        RequestKind::WitchDecision {
            victim,
            heal_available,
            poison_available,
            ..
        } => {
            v.insert("victim", victim.0.to_string());
            v.insert(
                "potions",
                match (heal_available, poison_available) {
                    (true, true) => "heal and poison",
                    (true, false) => "heal only",
                    (false, true) => "poison only",
                    (false, false) => "none",
                }
                .into(),
            );
        }
        RequestKind::SheriffSummary { tally } => {
            let mut parts: Vec<String> = tally
                .totals
                .iter()
                .map(|(s, w)| format!("seat {}: {w}", s.0))
                .collect();
            if parts.is_empty() {
                parts.push("everyone abstained".into());
            }
            v.insert("tally", parts.join(", "));
        }
        RequestKind::Speech { debate } => {
            v.insert("debate", if *debate { " in the tie debate" } else { "" }.into());
        }
        _ => {}
    }
    v
}

/// Prompt for one decision: system text plus the per-kind template and the
/// request footer.
pub fn build_prompt(templates: &PromptTemplates, ctx: &AgentContext) -> ChatTranscript {
    let vars = template_vars(ctx);
    let system = templates.render("system", &vars);
    let mut user = templates.render(ctx.request.tag().name(), &vars);
    if !user.ends_with('\n') {
        user.push('\n');
    }
    user.push_str(&request_footer(&ctx.request));
    ChatTranscript::new(vec![ChatMessage::system(system), ChatMessage::user(user)])
        .expect("system-first transcript is valid")
}

/// Agent backed by a chat provider. A reply that fails to parse is shown
/// back to the model with the error, up to [`MAX_REQUERIES`] times; then the
/// request's deterministic fallback is used.
pub struct LlmAgent {
    provider: Arc<dyn ChatProvider>,
    params: GenerationParams,
    templates: Arc<PromptTemplates>,
}

impl LlmAgent {
    pub fn new(provider: Arc<dyn ChatProvider>, params: GenerationParams, templates: Arc<PromptTemplates>) -> Self {
        Self {
            provider,
            params,
            templates,
        }
    }
}

impl Agent for LlmAgent {
    fn decide(&self, ctx: &AgentContext) -> Result<Decision, AgentError> {
        let mut transcript = build_prompt(&self.templates, ctx);
        for attempt in 0..=MAX_REQUERIES {
            let reply = self.provider.complete(&transcript, &self.params)?;
            match parse_response(&reply.text, &ctx.request) {
                Ok(response) => {
                    return Ok(Decision {
                        response,
                        fallback: false,
                        attempts: attempt + 1,
                    })
                }
                Err(e) => {
                    tracing::debug!(seat = ctx.seat.0, attempt, error = %e, "unusable reply");
                    transcript.push(ChatMessage::assistant(reply.text));
                    transcript.push(ChatMessage::user(format!(
                        "That answer could not be used: {e}.\nReply again, ending with the answer line.\n{}",
                        request_footer(&ctx.request)
                    )));
                }
            }
        }
        tracing::warn!(seat = ctx.seat.0, kind = %ctx.request.tag(), "falling back to default action");
        Ok(Decision {
            response: ctx.request.fallback(),
            fallback: true,
            attempts: MAX_REQUERIES + 1,
        })
    }

    fn uses_model(&self) -> bool {
        true
    }
}

struct Footer {
    tag: String,
    legal: Vec<Seat>,
    heal: bool,
    poison: bool,
    both: bool,
}

fn read_footer(text: &str) -> Option<Footer> {
    let start = text.rfind("REQUEST: ")?;
    let mut f = Footer {
        tag: String::new(),
        legal: Vec::new(),
        heal: false,
        poison: false,
        both: false,
    };
    for line in text[start..].lines() {
        if let Some(v) = line.strip_prefix("REQUEST: ") {
            f.tag = v.trim().to_string();
        } else if let Some(v) = line.strip_prefix("LEGAL: ") {
            f.legal = v.split(',').filter_map(|x| x.trim().parse().ok().map(Seat)).collect();
        } else if let Some(v) = line.strip_prefix("POTIONS: ") {
            f.heal = v.contains("heal=yes");
            f.poison = v.contains("poison=yes");
            f.both = v.contains("both=yes");
        }
    }
    Some(f)
}

/// Deterministic legal answer to any prompt built by [`build_prompt`] or
/// the summarizer, chosen by hashing the whole transcript. Intended as a
/// [`werewolf_gateway::MockProvider`] responder for offline runs.
pub fn legal_reply(transcript: &ChatTranscript) -> Option<String> {
    let last = transcript.last_user()?;
    let footer = read_footer(last)?;
    let mut rng = SplitMix64::new(fnv1a64(transcript.fingerprint().as_bytes()));
    let legal = &footer.legal;
    let pick = |rng: &mut SplitMix64| legal.get(rng.below(legal.len().max(1))).copied();
    let optional = |rng: &mut SplitMix64| {
        let i = rng.below(legal.len() + 1);
        legal.get(i).copied()
    };
    if footer.tag == "summary" {
        let lines: Vec<&str> = last
            .lines()
            .filter(|l| l.starts_with("[round"))
            .collect();
        let tail = &lines[lines.len().saturating_sub(4)..];
        return Some(format!("SUMMARY: {}", if tail.is_empty() { "quiet game so far".to_string() } else { tail.join(" ") }));
    }
    let tag = RequestTag::from_name(&footer.tag)?;
    let response = match tag {
        RequestTag::WolfProposal => AgentResponse::WolfProposal { target: pick(&mut rng)? },
        RequestTag::GuardTarget => AgentResponse::GuardTarget { target: pick(&mut rng)? },
        RequestTag::SeerTarget => AgentResponse::SeerTarget { target: pick(&mut rng)? },
        RequestTag::WitchDecision => {
            let heal = footer.heal && rng.chance(1, 2);
            let poison = (footer.poison && (!heal || footer.both) && rng.chance(1, 3))
                .then(|| pick(&mut rng))
                .flatten();
            AgentResponse::WitchDecision { heal, poison }
        }
        RequestTag::HunterShot => AgentResponse::HunterShot {
            target: optional(&mut rng),
        },
        RequestTag::Speech => AgentResponse::Speech {
            text: format!("I have my eye on seat {}.", pick(&mut rng).map_or(0, |s| s.0)),
        },
        RequestTag::SheriffSummary => AgentResponse::SheriffSummary {
            recommended: pick(&mut rng)?,
            text: "Follow my recommendation.".into(),
        },
        RequestTag::Inference => AgentResponse::Inference {
            claims: legal
                .iter()
                .map(|s| (*s, if rng.chance(1, 2) { Camp::Wolf } else { Camp::Good }))
                .collect(),
        },
        RequestTag::SpeakingOrderChoice => AgentResponse::SpeakingOrderChoice {
            start: pick(&mut rng)?,
            direction: if rng.chance(1, 2) {
                Direction::Ascending
            } else {
                Direction::Descending
            },
        },
        RequestTag::ElectionBallot | RequestTag::PseudoBallot | RequestTag::OfficialBallot | RequestTag::TiebreakBallot => {
            AgentResponse::ballot_for(tag, optional(&mut rng))?
        }
    };
    Some(format!("Let me think about this.\n{}", render_response(&response)))
}
