use std::collections::{BTreeMap, BTreeSet};

use super::MetricsError;
use crate::game::{Camp, DeathCause, GameEvent, NightActionKind, Role, Seat, VoteKind};

#[derive(Debug, Clone, PartialEq)]
pub struct Ballot {
    pub round: u32,
    pub kind: VoteKind,
    pub voter: Seat,
    pub target: Option<Seat>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Inference {
    pub round: u32,
    pub seat: Seat,
    pub claims: BTreeMap<Seat, Camp>,
    /// Seats alive when the inference was made.
    pub alive: BTreeSet<Seat>,
}

/// One finished game, indexed for scoring. Every index is rebuilt from the
/// raw events.
#[derive(Debug, Clone, PartialEq)]
pub struct GameLogView {
    pub roles: BTreeMap<Seat, Role>,
    pub models: BTreeMap<Seat, String>,
    pub winner: Camp,
    pub total_rounds: u32,
    /// Seat → (round, cause).
    pub deaths: BTreeMap<Seat, (u32, DeathCause)>,
    /// (round, target).
    pub seer_checks: Vec<(u32, Seat)>,
    pub guard_targets: Vec<(u32, Seat)>,
    pub witch_heals: Vec<(u32, Seat)>,
    pub witch_poisons: Vec<(u32, Seat)>,
    /// Round → the wolves' chosen victim.
    pub wolf_targets: BTreeMap<u32, Seat>,
    /// (hunter, target) for every hunter decision, including declines.
    pub hunter_shots: Vec<(Seat, Option<Seat>)>,
    pub ballots: Vec<Ballot>,
    /// (round, sheriff, recommended).
    pub sheriff_summaries: Vec<(u32, Seat, Seat)>,
    pub inferences: Vec<Inference>,
}

impl GameLogView {
    pub fn from_events<'a>(events: impl IntoIterator<Item = &'a GameEvent>) -> Result<Self, MetricsError> {
        let mut v = GameLogView {
            roles: BTreeMap::new(),
            models: BTreeMap::new(),
            winner: Camp::Good,
            total_rounds: 0,
            deaths: BTreeMap::new(),
            seer_checks: Vec::new(),
            guard_targets: Vec::new(),
            witch_heals: Vec::new(),
            witch_poisons: Vec::new(),
            wolf_targets: BTreeMap::new(),
            hunter_shots: Vec::new(),
            ballots: Vec::new(),
            sheriff_summaries: Vec::new(),
            inferences: Vec::new(),
        };
        let mut round = 0u32;
        let mut over = None;
        for e in events {
            if over.is_some() {
                return Err(MetricsError::Inconsistent("event after game over".into()));
            }
            match e {
                GameEvent::RoleAssigned { seat, role, model_tag } => {
                    if v.roles.insert(*seat, *role).is_some() {
                        return Err(MetricsError::Inconsistent(format!("{seat} assigned twice")));
                    }
                    v.models.insert(*seat, model_tag.clone());
                }
                GameEvent::RoundStarted { round: r } => round = *r,
                GameEvent::NightAction { kind, target, .. } => match kind {
                    NightActionKind::Guard => v.guard_targets.push((round, *target)),
                    NightActionKind::WitchHeal => v.witch_heals.push((round, *target)),
                    NightActionKind::WitchPoison => v.witch_poisons.push((round, *target)),
                    NightActionKind::WolfProposal => {}
                },
                GameEvent::WolfTarget { target } => {
                    v.wolf_targets.insert(round, *target);
                }
                GameEvent::SeerResult { target, .. } => v.seer_checks.push((round, *target)),
                GameEvent::Death { seat, cause } => {
                    if v.deaths.insert(*seat, (round, *cause)).is_some() {
                        return Err(MetricsError::Inconsistent(format!("{seat} died twice")));
                    }
                }
                GameEvent::HunterShot { hunter, target } => v.hunter_shots.push((*hunter, *target)),
                GameEvent::VoteCast {
                    kind,
                    voter,
                    target,
                    weight,
                } => v.ballots.push(Ballot {
                    round,
                    kind: *kind,
                    voter: *voter,
                    target: *target,
                    weight: *weight,
                }),
                GameEvent::SheriffSummary {
                    sheriff, recommended, ..
                } => v.sheriff_summaries.push((round, *sheriff, *recommended)),
                GameEvent::IdentityInference { seat, claims } => v.inferences.push(Inference {
                    round,
                    seat: *seat,
                    claims: claims.clone(),
                    alive: v.roles.keys().filter(|s| !v.deaths.contains_key(s)).copied().collect(),
                }),
                GameEvent::GameOver { winner, total_rounds } => over = Some((*winner, *total_rounds)),
                GameEvent::WitchInformed { .. }
                | GameEvent::NightDeaths { .. }
                | GameEvent::ElectionRunoff { .. }
                | GameEvent::SheriffElected { .. }
                | GameEvent::SpeakingOrder { .. }
                | GameEvent::Speech { .. }
                | GameEvent::TieDebate { .. }
                | GameEvent::Exile { .. }
                | GameEvent::NoExile => {}
            }
        }
        let (winner, total_rounds) = over.ok_or(MetricsError::Incomplete)?;
        if v.roles.is_empty() || v.roles.keys().map(|s| s.index()).ne(0..v.roles.len()) {
            return Err(MetricsError::Inconsistent("seats are not 0..n".into()));
        }
        if total_rounds == 0 {
            return Err(MetricsError::Inconsistent("total_rounds is 0".into()));
        }
        let known = |s: &Seat| v.roles.contains_key(s);
        if !v.deaths.keys().all(known) {
            return Err(MetricsError::Inconsistent("death of unknown seat".into()));
        }
        v.winner = winner;
        v.total_rounds = total_rounds;
        Ok(v)
    }

    pub fn camp(&self, seat: Seat) -> Option<Camp> {
        self.roles.get(&seat).map(|r| r.camp())
    }

    pub fn is_wolf(&self, seat: Seat) -> bool {
        self.roles.get(&seat) == Some(&Role::Werewolf)
    }

    pub fn seats_with(&self, role: Role) -> Vec<Seat> {
        self.roles.iter().filter(|(_, r)| **r == role).map(|(s, _)| *s).collect()
    }

    pub fn wolves(&self) -> BTreeSet<Seat> {
        self.seats_with(Role::Werewolf).into_iter().collect()
    }

    pub fn alive_at_end(&self, seat: Seat) -> bool {
        !self.deaths.contains_key(&seat)
    }

    pub fn model(&self, seat: Seat) -> &str {
        self.models.get(&seat).map(String::as_str).unwrap_or_default()
    }
}
