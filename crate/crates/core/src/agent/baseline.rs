use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::context::AgentContext;
use crate::game::{AgentResponse, Camp, Direction, GameEvent, RequestKind, Role, Seat, TallyOutcome, VoteKind};
use crate::rng::{fnv1a64, mix64, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Random,
    Heuristic,
}

/// Deterministic decision without any model: a pure function of
/// (request, context, seed).
pub fn baseline_policy(kind: BaselineKind, ctx: &AgentContext, seed: u64) -> AgentResponse {
    match kind {
        BaselineKind::Random => random_policy(ctx, seed),
        BaselineKind::Heuristic => heuristic_policy(ctx),
    }
}

/// Per-decision stream keyed by seat, round, request kind and how much of
/// the game this seat has seen.
fn decision_rng(ctx: &AgentContext, seed: u64) -> SplitMix64 {
    let key = format!(
        "{}:{}:{}:{}",
        ctx.seat.0,
        ctx.round,
        ctx.request.tag().name(),
        ctx.events.len()
    );
    SplitMix64::new(mix64(seed ^ fnv1a64(key.as_bytes())))
}

fn pick(rng: &mut SplitMix64, set: &BTreeSet<Seat>) -> Option<Seat> {
    if set.is_empty() {
        return None;
    }
    set.iter().nth(rng.below(set.len())).copied()
}

/// Uniform over legal options; abstain or decline counts as one option.
pub fn random_policy(ctx: &AgentContext, seed: u64) -> AgentResponse {
    let mut rng = decision_rng(ctx, seed);
    let legal = &ctx.request.legal_targets;
    let must = |rng: &mut SplitMix64| pick(rng, legal).expect("target kinds have legal targets");
    let optional = |rng: &mut SplitMix64| {
        let i = rng.below(legal.len() + 1);
        legal.iter().nth(i).copied()
    };
    match &ctx.request.kind {
        RequestKind::WolfProposal => AgentResponse::WolfProposal { target: must(&mut rng) },
        RequestKind::GuardTarget => AgentResponse::GuardTarget { target: must(&mut rng) },
        RequestKind::SeerTarget => AgentResponse::SeerTarget { target: must(&mut rng) },
        RequestKind::WitchDecision {
            heal_available,
            poison_available,
            both_allowed,
            ..
        } => {
            let heal = *heal_available && rng.chance(1, 2);
            let poison = if *poison_available && (!heal || *both_allowed) && rng.chance(1, 3) {
                pick(&mut rng, legal)
            } else {
                None
            };
            AgentResponse::WitchDecision { heal, poison }
        }
        RequestKind::HunterShot => AgentResponse::HunterShot {
            target: optional(&mut rng),
        },
        RequestKind::Speech { debate } => AgentResponse::Speech {
            text: format!(
                "Seat {} {}: my read is that seat {} deserves attention.",
                ctx.seat.0,
                if *debate { "defends" } else { "speaks" },
                pick(&mut rng, &ctx.alive).map_or(0, |s| s.0)
            ),
        },
        RequestKind::SheriffSummary { .. } => AgentResponse::SheriffSummary {
            recommended: must(&mut rng),
            text: "Random recommendation.".into(),
        },
        RequestKind::Inference => AgentResponse::Inference {
            claims: legal
                .iter()
                .map(|s| (*s, if rng.chance(1, 2) { Camp::Wolf } else { Camp::Good }))
                .collect(),
        },
        RequestKind::SpeakingOrderChoice => AgentResponse::SpeakingOrderChoice {
            start: must(&mut rng),
            direction: if rng.chance(1, 2) {
                Direction::Ascending
            } else {
                Direction::Descending
            },
        },
        RequestKind::ElectionBallot
        | RequestKind::PseudoBallot
        | RequestKind::OfficialBallot
        | RequestKind::TiebreakBallot => {
            AgentResponse::ballot_for(ctx.request.tag(), optional(&mut rng)).expect("ballot kind")
        }
    }
}

/// Camp beliefs: certain knowledge first, then public suspicion.
fn beliefs(ctx: &AgentContext) -> BTreeMap<Seat, Camp> {
    let mut out = BTreeMap::new();
    if let Some(mates) = &ctx.private.wolf_teammates {
        for s in &ctx.alive {
            let camp = if mates.contains(s) || *s == ctx.seat { Camp::Wolf } else { Camp::Good };
            out.insert(*s, camp);
        }
        return out;
    }
    for (s, wolf) in &ctx.private.seer_results {
        out.insert(*s, if *wolf { Camp::Wolf } else { Camp::Good });
    }
    out.insert(ctx.seat, Camp::Good);
    if !out.values().any(|c| *c == Camp::Wolf) {
        if let Some(s) = most_suspected(ctx, &out) {
            out.insert(s, Camp::Wolf);
        }
    }
    for s in &ctx.alive {
        out.entry(*s).or_insert(Camp::Good);
    }
    out
}

/// The alive, not-yet-classified seat with the most public votes against it
/// (lowest seat on ties); with no votes yet, the lowest such seat.
fn most_suspected(ctx: &AgentContext, known: &BTreeMap<Seat, Camp>) -> Option<Seat> {
    let mut votes: BTreeMap<Seat, u32> = BTreeMap::new();
    for e in &ctx.events {
        if let GameEvent::VoteCast {
            kind: VoteKind::Pseudo | VoteKind::Official | VoteKind::Tiebreak,
            target: Some(t),
            ..
        } = e
        {
            *votes.entry(*t).or_default() += 1;
        }
    }
    ctx.alive
        .iter()
        .filter(|s| !known.contains_key(s))
        .max_by(|a, b| {
            let (va, vb) = (votes.get(a).copied().unwrap_or(0), votes.get(b).copied().unwrap_or(0));
            va.cmp(&vb).then(b.cmp(a))
        })
        .copied()
}

fn first_in(legal: &BTreeSet<Seat>, pred: impl Fn(&Seat) -> bool) -> Option<Seat> {
    legal.iter().copied().find(|s| pred(s))
}

/// Rule-based play. Seers check the lowest unchecked seat, wolves target
/// the lowest-seat non-wolf, and votes follow the seat's latest inference.
pub fn heuristic_policy(ctx: &AgentContext) -> AgentResponse {
    let legal = &ctx.request.legal_targets;
    let lowest = || legal.iter().next().copied().expect("target kinds have legal targets");
    let is_wolf_mate = |s: &Seat| ctx.private.wolf_teammates.as_ref().is_some_and(|m| m.contains(s));
    let claimed_wolves: Vec<Seat> = match ctx.last_inference() {
        Some(claims) => claims.iter().filter(|(_, c)| **c == Camp::Wolf).map(|(s, _)| *s).collect(),
        None => beliefs(ctx).into_iter().filter(|(_, c)| *c == Camp::Wolf).map(|(s, _)| s).collect(),
    };
    let ballot_target = || -> Option<Seat> {
        if ctx.role == Role::Werewolf {
            return first_in(legal, |s| !is_wolf_mate(s));
        }
        if let Some(t) = ctx.private.seer_results.iter().find(|(s, w)| **w && legal.contains(s)) {
            return Some(*t.0);
        }
        claimed_wolves.iter().copied().find(|s| legal.contains(s))
    };
    match &ctx.request.kind {
        RequestKind::WolfProposal => AgentResponse::WolfProposal {
            target: first_in(legal, |s| !is_wolf_mate(s)).unwrap_or_else(lowest),
        },
        RequestKind::SeerTarget => AgentResponse::SeerTarget {
            target: first_in(legal, |s| !ctx.private.seer_results.contains_key(s)).unwrap_or_else(lowest),
        },
        RequestKind::GuardTarget => AgentResponse::GuardTarget {
            target: ctx
                .sheriff
                .filter(|s| legal.contains(s))
                .or_else(|| first_in(legal, |s| *s != ctx.seat))
                .unwrap_or_else(lowest),
        },
        RequestKind::WitchDecision {
            heal_available,
            poison_available,
            both_allowed,
            ..
        } => {
            let heal = *heal_available;
            let known_wolf = ctx
                .private
                .seer_results
                .iter()
                .find(|(s, w)| **w && legal.contains(s))
                .map(|(s, _)| *s);
            let poison = known_wolf.filter(|_| *poison_available && (!heal || *both_allowed));
            AgentResponse::WitchDecision { heal, poison }
        }
        RequestKind::HunterShot => AgentResponse::HunterShot {
            target: claimed_wolves.iter().copied().find(|s| legal.contains(s)),
        },
        RequestKind::Speech { .. } => {
            let suspects: Vec<String> = claimed_wolves
                .iter()
                .filter(|s| **s != ctx.seat && !is_wolf_mate(s))
                .map(|s| s.0.to_string())
                .collect();
            let text = if ctx.role == Role::Werewolf || suspects.is_empty() {
                format!("Seat {} has no strong read yet.", ctx.seat.0)
            } else {
                format!("Seat {} suspects seat {}.", ctx.seat.0, suspects.join(" and seat "))
            };
            AgentResponse::Speech { text }
        }
        RequestKind::SheriffSummary { tally } => {
            let top = match &tally.outcome {
                TallyOutcome::Unique(s) => Some(*s),
                TallyOutcome::Tied(t) => t.iter().next().copied(),
                TallyOutcome::NoExile => None,
            };
            let recommended = top
                .filter(|s| legal.contains(s))
                .or_else(ballot_target)
                .unwrap_or_else(lowest);
            AgentResponse::SheriffSummary {
                recommended,
                text: format!("The pseudo vote points to seat {}.", recommended.0),
            }
        }
        RequestKind::Inference => {
            let b = beliefs(ctx);
            AgentResponse::Inference {
                claims: legal
                    .iter()
                    .map(|s| (*s, b.get(s).copied().unwrap_or(Camp::Good)))
                    .collect(),
            }
        }
        RequestKind::SpeakingOrderChoice => AgentResponse::SpeakingOrderChoice {
            start: lowest(),
            direction: Direction::Ascending,
        },
        RequestKind::ElectionBallot => {
            let own = if ctx.role == Role::Werewolf {
                first_in(legal, |s| *s == ctx.seat || is_wolf_mate(s))
            } else {
                first_in(legal, |s| *s == ctx.seat)
            };
            AgentResponse::ElectionBallot {
                target: own.or_else(|| legal.iter().next().copied()),
            }
        }
        RequestKind::PseudoBallot | RequestKind::OfficialBallot | RequestKind::TiebreakBallot => {
            AgentResponse::ballot_for(ctx.request.tag(), ballot_target()).expect("ballot kind")
        }
    }
}
