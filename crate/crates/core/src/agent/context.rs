use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{
    ActionRequest, DeathCause, GameEvent, GameState, NightActionKind, Role, Seat, VoteKind,
};
use crate::memory::Retrieved;

/// Observations only this seat (or, for the teammate list, only wolves) may
/// hold.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrivateObservations {
    /// Present iff the seat is a werewolf; excludes the seat itself.
    pub wolf_teammates: Option<BTreeSet<Seat>>,
    /// Seer only: target → is werewolf.
    pub seer_results: BTreeMap<Seat, bool>,
    /// Witch only: (round, announced victim).
    pub witch_victims: Vec<(u32, Seat)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgentContext {
    pub seat: Seat,
    pub role: Role,
    pub model_tag: String,
    pub round: u32,
    pub n_players: usize,
    pub alive: BTreeSet<Seat>,
    pub sheriff: Option<Seat>,
    /// Events this seat may see, in log order.
    pub events: Vec<GameEvent>,
    pub private: PrivateObservations,
    pub request: ActionRequest,
    pub retrieved: Vec<Retrieved>,
    pub history_summary: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ContextError {
    #[error("{0} is not a seat in this game")]
    UnknownSeat(Seat),
    #[error("{0} is dead and has no pending decision")]
    Inactive(Seat),
}

/// Builds the only view of the game an agent receives. Every event passes
/// through [`GameEvent::visible_to`]; private observations are derived from
/// that filtered stream, never from hidden state, except the wolf roster
/// which werewolves know from the start.
pub fn build_context(
    state: &GameState,
    request: &ActionRequest,
    retrieved: Vec<Retrieved>,
    history_summary: Option<String>,
) -> Result<AgentContext, ContextError> {
    let seat = request.seat;
    let role = state.role_of(seat).ok_or(ContextError::UnknownSeat(seat))?;
    if !state.is_alive(seat) && state.pending_hunter() != Some(seat) {
        return Err(ContextError::Inactive(seat));
    }
    let events: Vec<GameEvent> = state
        .events()
        .iter()
        .filter(|e| e.visible_to(seat, role))
        .cloned()
        .collect();
    let mut private = PrivateObservations::default();
    if role == Role::Werewolf {
        private.wolf_teammates = Some(
            state
                .players()
                .iter()
                .filter(|p| p.role == Role::Werewolf && p.seat != seat)
                .map(|p| p.seat)
                .collect(),
        );
    }
    let mut round = 0;
    for e in &events {
        match e {
            GameEvent::RoundStarted { round: r } => round = *r,
            GameEvent::SeerResult {
                seer,
                target,
                is_werewolf,
            } if *seer == seat => {
                private.seer_results.insert(*target, *is_werewolf);
            }
            GameEvent::WitchInformed { witch, victim } if *witch == seat => {
                private.witch_victims.push((round, *victim));
            }
            _ => {}
        }
    }
    Ok(AgentContext {
        seat,
        role,
        model_tag: state.model_of(seat).unwrap_or_default().to_string(),
        round: state.round(),
        n_players: state.n_players(),
        alive: state.alive().clone(),
        sheriff: state.sheriff(),
        events,
        private,
        request: request.clone(),
        retrieved,
        history_summary,
    })
}

impl AgentContext {
    /// Human-readable transcript, one line per visible event.
    pub fn transcript_lines(&self) -> Vec<String> {
        let mut round = 0;
        let mut out = Vec::new();
        for e in &self.events {
            if let GameEvent::RoundStarted { round: r } = e {
                round = *r;
            }
            if let Some(line) = describe(e, self.seat) {
                out.push(format!("[round {round}] {line}"));
            }
        }
        out
    }

    /// Private knowledge as prompt text.
    pub fn private_lines(&self) -> Vec<String> {
        let mut out = vec![format!("You are seat {} and your role is {}.", self.seat.0, self.role.name())];
        if let Some(mates) = &self.private.wolf_teammates {
            if mates.is_empty() {
                out.push("You are the only werewolf.".into());
            } else {
                out.push(format!("Your werewolf teammates: {}.", seat_list(mates)));
            }
        }
        for (t, wolf) in &self.private.seer_results {
            out.push(format!(
                "You checked seat {}: {}.",
                t.0,
                if *wolf { "werewolf" } else { "not a werewolf" }
            ));
        }
        for (r, v) in &self.private.witch_victims {
            out.push(format!("Night {r}: the victim is seat {}.", v.0));
        }
        out
    }

    /// The most recent inference this seat submitted.
    pub fn last_inference(&self) -> Option<&BTreeMap<Seat, crate::game::Camp>> {
        self.events.iter().rev().find_map(|e| match e {
            GameEvent::IdentityInference { seat, claims } if *seat == self.seat => Some(claims),
            _ => None,
        })
    }
}

pub fn seat_list<'a>(seats: impl IntoIterator<Item = &'a Seat>) -> String {
    let v: Vec<String> = seats.into_iter().map(|s| s.0.to_string()).collect();
    if v.is_empty() {
        "none".into()
    } else {
        v.join(", ")
    }
}

fn describe(e: &GameEvent, me: Seat) -> Option<String> {
    let who = |s: Seat| {
        if s == me {
            format!("you (seat {})", s.0)
        } else {
            format!("seat {}", s.0)
        }
    };
    let target = |t: Option<Seat>| t.map_or("abstain".to_string(), |s| format!("seat {}", s.0));
    let mut s = String::new();
    match e {
        GameEvent::RoleAssigned { role, .. } => write!(s, "your role is {}", role.name()),
        GameEvent::RoundStarted { .. } => write!(s, "night falls"),
        GameEvent::NightAction { kind, actor, target } => {
            let verb = match kind {
                NightActionKind::WolfProposal => "proposed to kill",
                NightActionKind::Guard => "guarded",
                NightActionKind::WitchHeal => "healed",
                NightActionKind::WitchPoison => "poisoned",
            };
            write!(s, "{} {verb} seat {}", who(*actor), target.0)
        }
        GameEvent::WolfTarget { target } => write!(s, "the werewolves chose seat {}", target.0),
        GameEvent::SeerResult {
            target, is_werewolf, ..
        } => write!(
            s,
            "you checked seat {}: {}",
            target.0,
            if *is_werewolf { "werewolf" } else { "not a werewolf" }
        ),
        GameEvent::WitchInformed { victim, .. } => write!(s, "tonight's victim is seat {}", victim.0),
        GameEvent::Death { seat, cause } => match cause {
            DeathCause::Exile => return None,
            DeathCause::HunterShot => write!(s, "seat {} was shot by the hunter", seat.0),
            DeathCause::WolfKill | DeathCause::Poison => return None,
        },
        GameEvent::NightDeaths { seats } => {
            if seats.is_empty() {
                write!(s, "dawn: nobody died last night")
            } else {
                write!(s, "dawn: died last night: {}", seat_list(seats))
            }
        }
        GameEvent::HunterShot { hunter, target } => match target {
            Some(t) => write!(s, "hunter {} shot seat {}", who(*hunter), t.0),
            None => write!(s, "hunter {} declined to shoot", who(*hunter)),
        },
        GameEvent::ElectionRunoff { candidates } => write!(s, "sheriff runoff between {}", seat_list(candidates)),
        GameEvent::SheriffElected { seat } => write!(s, "{} was elected sheriff", who(*seat)),
        GameEvent::SpeakingOrder { order, .. } => write!(s, "speaking order: {}", seat_list(order)),
        GameEvent::Speech { seat, text, debate } => write!(
            s,
            "{} {}: {}",
            who(*seat),
            if *debate { "(tie debate) said" } else { "said" },
            text.replace('\n', " ")
        ),
        GameEvent::VoteCast {
            kind,
            voter,
            target: t,
            ..
        } => {
            let k = match kind {
                VoteKind::Election => "sheriff vote",
                VoteKind::Pseudo => "pseudo vote",
                VoteKind::Official => "vote",
                VoteKind::Tiebreak => "tiebreak vote",
            };
            write!(s, "{k}: {} → {}", who(*voter), target(*t))
        }
        GameEvent::SheriffSummary {
            sheriff,
            recommended,
            text,
        } => write!(
            s,
            "sheriff {} recommends exiling seat {}: {}",
            who(*sheriff),
            recommended.0,
            text.replace('\n', " ")
        ),
        GameEvent::IdentityInference { claims, .. } => {
            let parts: Vec<String> = claims
                .iter()
                .map(|(t, c)| format!("seat {}={}", t.0, c))
                .collect();
            write!(s, "your inference: {}", parts.join(", "))
        }
        GameEvent::TieDebate { tied } => write!(s, "tie between {}; debate follows", seat_list(tied)),
        GameEvent::Exile { seat } => write!(s, "{} was exiled", who(*seat)),
        GameEvent::NoExile => write!(s, "nobody was exiled"),
        GameEvent::GameOver { winner, total_rounds } => write!(s, "game over: {winner} camp wins after {total_rounds} rounds"),
    }
    .ok()?;
    Some(s)
}
