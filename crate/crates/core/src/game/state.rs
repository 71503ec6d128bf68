use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::{DeathCause, Direction, GameEvent, NightActionKind, VoteKind};
use super::night::{resolve_wolf_target, NightActions, NightOutcome};
use super::protocol::{ActionRequest, AgentResponse, RequestKind, RequestTag};
use super::types::{Camp, ConfigError, GameConfig, GuardSaveInteraction, PlayerSeat, Role, Seat};
use super::vote::{
    ballot_weight, election_step, tally_votes, ElectionStep, TallyOutcome, TallyResult, VoteRound,
};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Night,
    Dawn,
    Election,
    Speeches,
    PseudoVote,
    SheriffSummary,
    Inference,
    OfficialVote,
    TieDebate,
    TiebreakVote,
    Dusk,
    /// A dead hunter is deciding whether to shoot.
    HunterWindow,
    GameOver,
}

impl Phase {
    /// Phases that resolve without agent input.
    pub fn is_automatic(self) -> bool {
        matches!(self, Phase::Dawn | Phase::Dusk)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("the game is over")]
    GameOver,
    #[error("no response for pending {tag} request of {seat}")]
    MissingResponse { seat: Seat, tag: RequestTag },
    #[error("{seat} has no pending request")]
    UnexpectedResponse { seat: Seat },
    #[error("{seat} answered {got} but {expected} was requested")]
    WrongKind {
        seat: Seat,
        expected: RequestTag,
        got: RequestTag,
    },
    #[error("{seat} chose illegal target {target}; legal targets: {legal:?}")]
    IllegalTarget {
        seat: Seat,
        target: Seat,
        legal: BTreeSet<Seat>,
    },
    #[error("{seat} has already used the {potion} potion")]
    PotionSpent { seat: Seat, potion: &'static str },
    #[error("{seat} may not use both potions in one night")]
    BothPotions { seat: Seat },
    #[error("guard may not protect {target} on consecutive nights")]
    GuardRepeat { target: Seat },
    #[error("{role} is not alive")]
    RoleUnavailable { role: Role },
    #[error("operation not valid in phase {phase:?}")]
    WrongPhase { phase: Phase },
    #[error("{seat} is not the hunter")]
    NotHunter { seat: Seat },
    #[error("hunter cannot shoot: {reason}")]
    HunterUnavailable { reason: &'static str },
    #[error("sheriff election unavailable: {reason}")]
    ElectionUnavailable { reason: &'static str },
    #[error("no wolf proposals submitted")]
    NoProposals,
    #[error("{seat} is dead")]
    DeadActor { seat: Seat },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
struct NightProgress {
    wolf_proposals: BTreeMap<Seat, Seat>,
    guard_target: Option<Seat>,
    seer_target: Option<Seat>,
    wolf_target: Option<Seat>,
    awaiting_witch: bool,
}

/// Authoritative hidden-role state plus the append-only event log.
///
/// All mutation goes through [`GameState::submit`] and
/// [`GameState::advance`]; the driver loop is
///
/// ```text
/// while !state.is_over() {
///     let requests = state.pending_requests();
///     if requests.is_empty() { state.advance()?; continue; }
///     state.submit(answers_for(requests))?;
/// }
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    config: GameConfig,
    players: Vec<PlayerSeat>,
    round: u32,
    phase: Phase,
    alive: BTreeSet<Seat>,
    sheriff: Option<Seat>,
    election_held: bool,
    witch_heal_available: bool,
    witch_poison_available: bool,
    last_guard_target: Option<Seat>,
    hunter_shot_available: bool,
    hunter_death_cause: Option<DeathCause>,
    pending_hunter: Option<Seat>,
    resume_phase: Phase,
    rng: SplitMix64,
    night: NightProgress,
    dawn_deaths: Vec<(Seat, DeathCause)>,
    last_night_deaths: Vec<Seat>,
    election_candidates: BTreeSet<Seat>,
    election_runoff: bool,
    speaking_order: Vec<Seat>,
    speech_cursor: usize,
    order_chosen: bool,
    pseudo_tally: Option<TallyResult>,
    tied: BTreeSet<Seat>,
    winner: Option<Camp>,
    events: Vec<GameEvent>,
}

/// Creates a game: roles are shuffled over seats by SplitMix64 Fisher–Yates
/// seeded with `config.seed`, then `RoleAssigned` and `RoundStarted` are
/// logged.
pub fn new_game(config: GameConfig) -> Result<GameState, EngineError> {
    config.validate()?;
    let mut rng = SplitMix64::new(config.seed);
    let mut roles = config.roster.clone();
    rng.shuffle(&mut roles);
    let players: Vec<PlayerSeat> = roles
        .iter()
        .enumerate()
        .map(|(i, role)| PlayerSeat {
            seat: Seat(i as u8),
            role: *role,
            model_tag: config.model_for(*role),
        })
        .collect();
    let has = |r: Role| roles.contains(&r);
    let mut state = GameState {
        alive: players.iter().map(|p| p.seat).collect(),
        witch_heal_available: has(Role::Witch),
        witch_poison_available: has(Role::Witch),
        hunter_shot_available: has(Role::Hunter),
        players,
        config,
        round: 1,
        phase: Phase::Night,
        sheriff: None,
        election_held: false,
        last_guard_target: None,
        hunter_death_cause: None,
        pending_hunter: None,
        resume_phase: Phase::Night,
        rng,
        night: NightProgress::default(),
        dawn_deaths: Vec::new(),
        last_night_deaths: Vec::new(),
        election_candidates: BTreeSet::new(),
        election_runoff: false,
        speaking_order: Vec::new(),
        speech_cursor: 0,
        order_chosen: false,
        pseudo_tally: None,
        tied: BTreeSet::new(),
        winner: None,
        events: Vec::new(),
    };
    let assigned: Vec<GameEvent> = state
        .players
        .iter()
        .map(|p| GameEvent::RoleAssigned {
            seat: p.seat,
            role: p.role,
            model_tag: p.model_tag.clone(),
        })
        .collect();
    state.events.extend(assigned);
    state.events.push(GameEvent::RoundStarted { round: 1 });
    Ok(state)
}

/// Win rule over an alive set: Good when no wolf is alive; Wolf when alive
/// wolves outnumber alive non-wolves (or equal them, if `wolf_win_on_equal`).
pub fn win_for(roles: impl IntoIterator<Item = Role>, wolf_win_on_equal: bool) -> Option<Camp> {
    let (mut wolves, mut others) = (0usize, 0usize);
    for r in roles {
        if r == Role::Werewolf {
            wolves += 1;
        } else {
            others += 1;
        }
    }
    if wolves == 0 {
        Some(Camp::Good)
    } else if wolves > others || (wolf_win_on_equal && wolves == others) {
        Some(Camp::Wolf)
    } else {
        None
    }
}

impl GameState {
    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn players(&self) -> &[PlayerSeat] {
        &self.players
    }

    pub fn n_players(&self) -> usize {
        self.players.len()
    }

    pub fn role_of(&self, seat: Seat) -> Option<Role> {
        self.players.get(seat.index()).map(|p| p.role)
    }

    pub fn model_of(&self, seat: Seat) -> Option<&str> {
        self.players.get(seat.index()).map(|p| p.model_tag.as_str())
    }

    pub fn seat_of(&self, role: Role) -> Option<Seat> {
        self.players.iter().find(|p| p.role == role).map(|p| p.seat)
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn alive(&self) -> &BTreeSet<Seat> {
        &self.alive
    }

    pub fn is_alive(&self, seat: Seat) -> bool {
        self.alive.contains(&seat)
    }

    pub fn sheriff(&self) -> Option<Seat> {
        self.sheriff
    }

    pub fn witch_heal_available(&self) -> bool {
        self.witch_heal_available
    }

    pub fn witch_poison_available(&self) -> bool {
        self.witch_poison_available
    }

    pub fn last_guard_target(&self) -> Option<Seat> {
        self.last_guard_target
    }

    pub fn hunter_shot_available(&self) -> bool {
        self.hunter_shot_available
    }

    pub fn pending_hunter(&self) -> Option<Seat> {
        self.pending_hunter
    }

    pub fn winner(&self) -> Option<Camp> {
        self.winner
    }

    pub fn is_over(&self) -> bool {
        self.phase == Phase::GameOver
    }

    pub fn events(&self) -> &[GameEvent] {
        &self.events
    }

    /// The wolves' victim of the night in progress, once agreed.
    pub fn current_wolf_target(&self) -> Option<Seat> {
        self.night.wolf_target
    }

    pub fn alive_with_role(&self, role: Role) -> Vec<Seat> {
        self.alive
            .iter()
            .copied()
            .filter(|s| self.role_of(*s) == Some(role))
            .collect()
    }

    fn alive_except(&self, seat: Seat) -> BTreeSet<Seat> {
        self.alive.iter().copied().filter(|s| *s != seat).collect()
    }

    pub fn check_win(&self) -> Option<Camp> {
        win_for(
            self.alive.iter().filter_map(|s| self.role_of(*s)),
            self.config.wolf_win_on_equal,
        )
    }

    /// Alive seats minus last night's guard target; self-guarding allowed.
    pub fn legal_guard_targets(&self) -> Result<BTreeSet<Seat>, EngineError> {
        if self.phase != Phase::Night {
            return Err(EngineError::WrongPhase { phase: self.phase });
        }
        if self.alive_with_role(Role::Guard).is_empty() {
            return Err(EngineError::RoleUnavailable { role: Role::Guard });
        }
        Ok(self
            .alive
            .iter()
            .copied()
            .filter(|s| Some(*s) != self.last_guard_target)
            .collect())
    }

    /// Resolves a night in the order guard, wolf kill, seer, witch.
    ///
    /// The victim dies unless protected: guard alone or heal alone saves; both
    /// together follow `guard_save_interaction`. A poisoned seat always dies,
    /// and poison takes precedence as the recorded cause.
    pub fn resolve_night(&self, actions: &NightActions) -> Result<NightOutcome, EngineError> {
        let witch = self.seat_of(Role::Witch).unwrap_or(Seat(u8::MAX));
        if let Some(g) = actions.guard_target {
            if Some(g) == self.last_guard_target {
                return Err(EngineError::GuardRepeat { target: g });
            }
            self.require_alive_target(self.seat_of(Role::Guard).unwrap_or(g), g)?;
        }
        if actions.witch_heal && !self.witch_heal_available {
            return Err(EngineError::PotionSpent {
                seat: witch,
                potion: "heal",
            });
        }
        if let Some(p) = actions.witch_poison_target {
            if !self.witch_poison_available {
                return Err(EngineError::PotionSpent {
                    seat: witch,
                    potion: "poison",
                });
            }
            self.require_alive_target(witch, p)?;
        }
        if actions.witch_heal
            && actions.witch_poison_target.is_some()
            && !self.config.witch_both_potions_same_night
        {
            return Err(EngineError::BothPotions { seat: witch });
        }

        let wolves = self.alive_with_role(Role::Werewolf);
        let victim = resolve_wolf_target(&actions.wolf_proposals, &wolves);
        let mut deaths: BTreeMap<Seat, DeathCause> = BTreeMap::new();
        if let Some(v) = victim {
            let guarded = actions.guard_target == Some(v);
            let healed = actions.witch_heal;
            let dies = match (guarded, healed) {
                (false, false) => true,
                (true, true) => self.config.guard_save_interaction == GuardSaveInteraction::Die,
                _ => false,
            };
            if dies {
                deaths.insert(v, DeathCause::WolfKill);
            }
        }
        if let Some(p) = actions.witch_poison_target {
            deaths.insert(p, DeathCause::Poison);
        }
        let seer_verdict = actions
            .seer_target
            .map(|t| (t, self.role_of(t) == Some(Role::Werewolf)));
        let pending_hunter = deaths
            .iter()
            .find(|(s, cause)| self.role_of(**s) == Some(Role::Hunter) && self.hunter_may_shoot_after(**cause))
            .map(|(s, _)| *s);
        Ok(NightOutcome {
            wolf_victim: victim,
            deaths: deaths.into_iter().collect(),
            seer_verdict,
            pending_hunter,
        })
    }

    fn hunter_may_shoot_after(&self, cause: DeathCause) -> bool {
        self.hunter_shot_available
            && match cause {
                DeathCause::WolfKill | DeathCause::Exile => true,
                DeathCause::Poison => self.config.hunter_shoots_when_poisoned,
                DeathCause::HunterShot => false,
            }
    }

    fn require_alive_target(&self, actor: Seat, target: Seat) -> Result<(), EngineError> {
        if self.is_alive(target) {
            Ok(())
        } else {
            Err(EngineError::IllegalTarget {
                seat: actor,
                target,
                legal: self.alive.clone(),
            })
        }
    }

    /// Validates a first-day election: returns the winner, or the runoff
    /// field when the first ballot ties and no runoff ballot is supplied.
    pub fn run_sheriff_election(
        &self,
        first: &VoteRound,
        runoff: Option<&VoteRound>,
    ) -> Result<ElectionStep, EngineError> {
        if !self.config.sheriff_enabled {
            return Err(EngineError::ElectionUnavailable {
                reason: "sheriff disabled",
            });
        }
        if self.round > 1 || self.election_held {
            return Err(EngineError::ElectionUnavailable {
                reason: "elections happen on the first day only",
            });
        }
        match election_step(first, &self.alive, false) {
            ElectionStep::Runoff(tied) => match runoff {
                Some(r) => Ok(election_step(r, &tied, true)),
                None => Ok(ElectionStep::Runoff(tied)),
            },
            done => Ok(done),
        }
    }

    /// The exact set of decisions the current phase awaits, ascending by
    /// seat. Empty only for automatic phases and after game over.
    pub fn pending_requests(&self) -> Vec<ActionRequest> {
        let req = |seat: Seat, kind: RequestKind, legal: BTreeSet<Seat>| ActionRequest {
            seat,
            kind,
            legal_targets: legal,
        };
        let everyone = |kind: RequestKind, legal: &dyn Fn(Seat) -> BTreeSet<Seat>| {
            self.alive
                .iter()
                .map(|s| req(*s, kind.clone(), legal(*s)))
                .collect::<Vec<_>>()
        };
        match self.phase {
            Phase::GameOver | Phase::Dawn | Phase::Dusk => Vec::new(),
            Phase::HunterWindow => {
                let hunter = self.pending_hunter.expect("hunter window without hunter");
                vec![req(hunter, RequestKind::HunterShot, self.alive_except(hunter))]
            }
            Phase::Night if self.night.awaiting_witch => {
                let witch = self.seat_of(Role::Witch).expect("witch step without witch");
                vec![req(
                    witch,
                    RequestKind::WitchDecision {
                        victim: self.night.wolf_target.expect("victim fixed before witch step"),
                        heal_available: self.witch_heal_available,
                        poison_available: self.witch_poison_available,
                        both_allowed: self.config.witch_both_potions_same_night,
                    },
                    self.alive_except(witch),
                )]
            }
            Phase::Night => self
                .alive
                .iter()
                .filter_map(|s| match self.role_of(*s)? {
                    Role::Werewolf => Some(req(*s, RequestKind::WolfProposal, self.alive_except(*s))),
                    Role::Guard => Some(req(
                        *s,
                        RequestKind::GuardTarget,
                        self.alive
                            .iter()
                            .copied()
                            .filter(|t| Some(*t) != self.last_guard_target)
                            .collect(),
                    )),
                    Role::Seer => Some(req(*s, RequestKind::SeerTarget, self.alive_except(*s))),
                    _ => None,
                })
                .collect(),
            Phase::Election => everyone(RequestKind::ElectionBallot, &|_| self.election_candidates.clone()),
            Phase::Speeches => match self.sheriff {
                Some(sheriff) if !self.order_chosen => vec![req(
                    sheriff,
                    RequestKind::SpeakingOrderChoice,
                    self.alive_except(sheriff),
                )],
                _ => vec![req(
                    self.speaking_order[self.speech_cursor],
                    RequestKind::Speech { debate: false },
                    BTreeSet::new(),
                )],
            },
            Phase::PseudoVote => everyone(RequestKind::PseudoBallot, &|s| self.alive_except(s)),
            Phase::SheriffSummary => {
                let sheriff = self.sheriff.expect("summary without sheriff");
                vec![req(
                    sheriff,
                    RequestKind::SheriffSummary {
                        tally: self.pseudo_tally.clone().expect("summary follows pseudo vote"),
                    },
                    self.alive_except(sheriff),
                )]
            }
            Phase::Inference => everyone(RequestKind::Inference, &|s| self.alive_except(s)),
            Phase::OfficialVote => everyone(RequestKind::OfficialBallot, &|s| self.alive_except(s)),
            Phase::TieDebate => vec![req(
                self.speaking_order[self.speech_cursor],
                RequestKind::Speech { debate: true },
                BTreeSet::new(),
            )],
            Phase::TiebreakVote => everyone(RequestKind::TiebreakBallot, &|s| {
                self.tied.iter().copied().filter(|t| *t != s).collect()
            }),
        }
    }

    /// Checks one response against its request without touching state.
    pub fn validate_response(request: &ActionRequest, response: &AgentResponse) -> Result<(), EngineError> {
        let seat = request.seat;
        if response.tag() != request.tag() {
            return Err(EngineError::WrongKind {
                seat,
                expected: request.tag(),
                got: response.tag(),
            });
        }
        let check = |target: Seat| {
            if request.legal_targets.contains(&target) {
                Ok(())
            } else {
                Err(EngineError::IllegalTarget {
                    seat,
                    target,
                    legal: request.legal_targets.clone(),
                })
            }
        };
        match response {
            AgentResponse::WolfProposal { target }
            | AgentResponse::GuardTarget { target }
            | AgentResponse::SeerTarget { target } => check(*target),
            AgentResponse::SheriffSummary { recommended, .. } => check(*recommended),
            AgentResponse::SpeakingOrderChoice { start, .. } => check(*start),
            AgentResponse::HunterShot { target }
            | AgentResponse::ElectionBallot { target }
            | AgentResponse::PseudoBallot { target }
            | AgentResponse::OfficialBallot { target }
            | AgentResponse::TiebreakBallot { target } => target.map_or(Ok(()), check),
            AgentResponse::Speech { .. } => Ok(()),
            AgentResponse::Inference { claims } => claims.keys().try_for_each(|t| check(*t)),
            AgentResponse::WitchDecision { heal, poison } => {
                let RequestKind::WitchDecision {
                    heal_available,
                    poison_available,
                    both_allowed,
                    ..
                } = request.kind
                else {
                    unreachable!("tags matched");
                };
                if *heal && !heal_available {
                    return Err(EngineError::PotionSpent { seat, potion: "heal" });
                }
                if let Some(p) = poison {
                    if !poison_available {
                        return Err(EngineError::PotionSpent { seat, potion: "poison" });
                    }
                    check(*p)?;
                }
                if *heal && poison.is_some() && !both_allowed {
                    return Err(EngineError::BothPotions { seat });
                }
                Ok(())
            }
        }
    }

    /// Applies one complete set of answers for the pending requests.
    ///
    /// Responses may arrive in any order; they are applied in ascending seat
    /// order. On error nothing changes. With no pending requests this is
    /// [`GameState::advance`].
    pub fn submit(
        &mut self,
        responses: impl IntoIterator<Item = (Seat, AgentResponse)>,
    ) -> Result<Vec<GameEvent>, EngineError> {
        if self.is_over() {
            return Err(EngineError::GameOver);
        }
        let responses: BTreeMap<Seat, AgentResponse> = responses.into_iter().collect();
        let pending = self.pending_requests();
        if pending.is_empty() {
            if let Some(seat) = responses.keys().next() {
                return Err(EngineError::UnexpectedResponse { seat: *seat });
            }
            return self.advance();
        }
        for req in &pending {
            let resp = responses.get(&req.seat).ok_or(EngineError::MissingResponse {
                seat: req.seat,
                tag: req.tag(),
            })?;
            Self::validate_response(req, resp)?;
        }
        if let Some(extra) = responses
            .keys()
            .find(|s| !pending.iter().any(|r| r.seat == **s))
        {
            return Err(EngineError::UnexpectedResponse { seat: *extra });
        }

        let start = self.events.len();
        self.apply(responses)?;
        Ok(self.events[start..].to_vec())
    }

    /// Runs an automatic phase (dawn announcements, dusk).
    pub fn advance(&mut self) -> Result<Vec<GameEvent>, EngineError> {
        let start = self.events.len();
        match self.phase {
            Phase::GameOver => return Err(EngineError::GameOver),
            Phase::Dawn => self.run_dawn(),
            Phase::Dusk => {
                self.round += 1;
                self.events.push(GameEvent::RoundStarted { round: self.round });
                self.enter(Phase::Night);
            }
            phase => return Err(EngineError::WrongPhase { phase }),
        }
        Ok(self.events[start..].to_vec())
    }

    /// A dead hunter's shot (or `None` to decline). Either way the
    /// opportunity is consumed; the win condition is re-checked.
    pub fn trigger_hunter(&mut self, shooter: Seat, target: Option<Seat>) -> Result<Vec<GameEvent>, EngineError> {
        if self.role_of(shooter) != Some(Role::Hunter) {
            return Err(EngineError::NotHunter { seat: shooter });
        }
        if self.is_alive(shooter) {
            return Err(EngineError::HunterUnavailable {
                reason: "hunter is alive",
            });
        }
        if !self.hunter_shot_available {
            return Err(EngineError::HunterUnavailable {
                reason: "shot already used",
            });
        }
        match self.hunter_death_cause {
            Some(cause) if self.hunter_may_shoot_after(cause) => {}
            Some(DeathCause::Poison) => {
                return Err(EngineError::HunterUnavailable {
                    reason: "hunter was poisoned",
                })
            }
            _ => {
                return Err(EngineError::HunterUnavailable {
                    reason: "hunter did not die by wolf kill or exile",
                })
            }
        }
        if let Some(t) = target {
            if !self.is_alive(t) {
                return Err(EngineError::IllegalTarget {
                    seat: shooter,
                    target: t,
                    legal: self.alive.clone(),
                });
            }
        }
        let start = self.events.len();
        self.hunter_shot_available = false;
        self.pending_hunter = None;
        self.events.push(GameEvent::HunterShot {
            hunter: shooter,
            target,
        });
        if let Some(t) = target {
            self.events.push(GameEvent::Death {
                seat: t,
                cause: DeathCause::HunterShot,
            });
            self.kill(t, DeathCause::HunterShot);
            self.finish_if_won();
        }
        Ok(self.events[start..].to_vec())
    }

    fn apply(&mut self, responses: BTreeMap<Seat, AgentResponse>) -> Result<(), EngineError> {
        match self.phase {
            Phase::Night if self.night.awaiting_witch => {
                let (witch, resp) = responses.into_iter().next().expect("validated");
                let AgentResponse::WitchDecision { heal, poison } = resp else {
                    unreachable!("validated")
                };
                let victim = self.night.wolf_target.expect("victim fixed");
                if heal {
                    self.events.push(GameEvent::NightAction {
                        kind: NightActionKind::WitchHeal,
                        actor: witch,
                        target: victim,
                    });
                }
                if let Some(p) = poison {
                    self.events.push(GameEvent::NightAction {
                        kind: NightActionKind::WitchPoison,
                        actor: witch,
                        target: p,
                    });
                }
                self.finish_night(heal, poison)
            }
            Phase::Night => {
                for (seat, resp) in responses {
                    match resp {
                        AgentResponse::WolfProposal { target } => {
                            self.night.wolf_proposals.insert(seat, target);
                            self.events.push(GameEvent::NightAction {
                                kind: NightActionKind::WolfProposal,
                                actor: seat,
                                target,
                            });
                        }
                        AgentResponse::GuardTarget { target } => {
                            self.night.guard_target = Some(target);
                            self.events.push(GameEvent::NightAction {
                                kind: NightActionKind::Guard,
                                actor: seat,
                                target,
                            });
                        }
                        AgentResponse::SeerTarget { target } => {
                            self.night.seer_target = Some(target);
                            self.events.push(GameEvent::SeerResult {
                                seer: seat,
                                target,
                                is_werewolf: self.role_of(target) == Some(Role::Werewolf),
                            });
                        }
                        _ => unreachable!("validated"),
                    }
                }
                let wolves = self.alive_with_role(Role::Werewolf);
                let victim = resolve_wolf_target(&self.night.wolf_proposals, &wolves)
                    .ok_or(EngineError::NoProposals)?;
                self.night.wolf_target = Some(victim);
                self.events.push(GameEvent::WolfTarget { target: victim });
                let witch = self
                    .alive_with_role(Role::Witch)
                    .first()
                    .copied()
                    .filter(|_| self.witch_heal_available || self.witch_poison_available);
                match witch {
                    Some(w) => {
                        self.night.awaiting_witch = true;
                        self.events.push(GameEvent::WitchInformed { witch: w, victim });
                        Ok(())
                    }
                    None => self.finish_night(false, None),
                }
            }
            Phase::HunterWindow => {
                let (hunter, resp) = responses.into_iter().next().expect("validated");
                let AgentResponse::HunterShot { target } = resp else {
                    unreachable!("validated")
                };
                self.trigger_hunter(hunter, target)?;
                if !self.is_over() {
                    self.enter(self.resume_phase);
                }
                Ok(())
            }
            Phase::Election => {
                let round = self.record_ballots(VoteKind::Election, &responses);
                match election_step(&round, &self.election_candidates, self.election_runoff) {
                    ElectionStep::Elected(seat) => {
                        self.sheriff = Some(seat);
                        self.election_held = true;
                        self.events.push(GameEvent::SheriffElected { seat });
                        self.enter(Phase::Speeches);
                    }
                    ElectionStep::Runoff(tied) => {
                        self.events.push(GameEvent::ElectionRunoff {
                            candidates: tied.clone(),
                        });
                        self.election_candidates = tied;
                        self.election_runoff = true;
                    }
                }
                Ok(())
            }
            Phase::Speeches | Phase::TieDebate => {
                let (seat, resp) = responses.into_iter().next().expect("validated");
                match resp {
                    AgentResponse::SpeakingOrderChoice { start, direction } => {
                        let sheriff = self.sheriff.expect("only the sheriff chooses");
                        let mut order = vec![sheriff];
                        order.extend(self.rotation(start, direction, Some(sheriff)));
                        self.events.push(GameEvent::SpeakingOrder {
                            order: order.clone(),
                            start: Some(start),
                            direction,
                        });
                        self.speaking_order = order;
                        self.speech_cursor = 0;
                        self.order_chosen = true;
                    }
                    AgentResponse::Speech { text } => {
                        let debate = self.phase == Phase::TieDebate;
                        self.events.push(GameEvent::Speech { seat, text, debate });
                        self.speech_cursor += 1;
                        if self.speech_cursor == self.speaking_order.len() {
                            let next = match (debate, self.sheriff) {
                                (true, _) => Phase::TiebreakVote,
                                (false, Some(_)) => Phase::PseudoVote,
                                (false, None) => Phase::Inference,
                            };
                            self.enter(next);
                        }
                    }
                    _ => unreachable!("validated"),
                }
                Ok(())
            }
            Phase::PseudoVote => {
                let round = self.record_ballots(VoteKind::Pseudo, &responses);
                self.pseudo_tally = Some(tally_votes(&round));
                self.enter(Phase::SheriffSummary);
                Ok(())
            }
            Phase::SheriffSummary => {
                let (sheriff, resp) = responses.into_iter().next().expect("validated");
                let AgentResponse::SheriffSummary { recommended, text } = resp else {
                    unreachable!("validated")
                };
                self.events.push(GameEvent::SheriffSummary {
                    sheriff,
                    recommended,
                    text,
                });
                self.enter(Phase::Inference);
                Ok(())
            }
            Phase::Inference => {
                for (seat, resp) in responses {
                    let AgentResponse::Inference { claims } = resp else {
                        unreachable!("validated")
                    };
                    self.events.push(GameEvent::IdentityInference { seat, claims });
                }
                self.enter(Phase::OfficialVote);
                Ok(())
            }
            Phase::OfficialVote | Phase::TiebreakVote => {
                let kind = if self.phase == Phase::OfficialVote {
                    VoteKind::Official
                } else {
                    VoteKind::Tiebreak
                };
                let round = self.record_ballots(kind, &responses);
                match (tally_votes(&round).outcome, kind) {
                    (TallyOutcome::Unique(seat), _) => self.exile(seat),
                    (TallyOutcome::Tied(tied), VoteKind::Official) => {
                        self.tied = tied;
                        self.enter(Phase::TieDebate);
                    }
                    _ => {
                        self.events.push(GameEvent::NoExile);
                        self.enter(Phase::Dusk);
                    }
                }
                Ok(())
            }
            Phase::Dawn | Phase::Dusk | Phase::GameOver => unreachable!("no requests in {:?}", self.phase),
        }
    }

    fn record_ballots(&mut self, kind: VoteKind, responses: &BTreeMap<Seat, AgentResponse>) -> VoteRound {
        let ballots: BTreeMap<Seat, Option<Seat>> = responses
            .iter()
            .map(|(s, r)| (*s, r.ballot().expect("validated ballot")))
            .collect();
        let round = VoteRound::new(kind, ballots, self.sheriff);
        for (voter, target) in &round.ballots {
            self.events.push(GameEvent::VoteCast {
                kind,
                voter: *voter,
                target: *target,
                weight: ballot_weight(kind, *voter, self.sheriff),
            });
        }
        round
    }

    fn finish_night(&mut self, heal: bool, poison: Option<Seat>) -> Result<(), EngineError> {
        let actions = NightActions {
            wolf_proposals: self.night.wolf_proposals.clone(),
            guard_target: self.night.guard_target,
            seer_target: self.night.seer_target,
            witch_heal: heal,
            witch_poison_target: poison,
        };
        let outcome = self.resolve_night(&actions)?;
        if heal {
            self.witch_heal_available = false;
        }
        if poison.is_some() {
            self.witch_poison_available = false;
        }
        self.last_guard_target = actions.guard_target;
        self.dawn_deaths = outcome.deaths;
        self.phase = Phase::Dawn;
        Ok(())
    }

    fn run_dawn(&mut self) {
        let deaths = std::mem::take(&mut self.dawn_deaths);
        self.last_night_deaths = deaths.iter().map(|(s, _)| *s).collect();
        self.events.push(GameEvent::NightDeaths {
            seats: self.last_night_deaths.clone(),
        });
        let mut hunter = None;
        for (seat, cause) in deaths {
            self.events.push(GameEvent::Death { seat, cause });
            if self.role_of(seat) == Some(Role::Hunter) && self.hunter_may_shoot_after(cause) {
                hunter = Some(seat);
            }
            self.kill(seat, cause);
        }
        if self.finish_if_won() {
            return;
        }
        let next = if self.config.sheriff_enabled && self.round == 1 && !self.election_held {
            Phase::Election
        } else {
            Phase::Speeches
        };
        self.open_hunter_window_or(hunter, next);
    }

    fn exile(&mut self, seat: Seat) {
        self.events.push(GameEvent::Exile { seat });
        self.events.push(GameEvent::Death {
            seat,
            cause: DeathCause::Exile,
        });
        self.kill(seat, DeathCause::Exile);
        if self.finish_if_won() {
            return;
        }
        let hunter = (self.role_of(seat) == Some(Role::Hunter)
            && self.hunter_may_shoot_after(DeathCause::Exile))
        .then_some(seat);
        self.open_hunter_window_or(hunter, Phase::Dusk);
    }

    fn open_hunter_window_or(&mut self, hunter: Option<Seat>, next: Phase) {
        match hunter {
            Some(h) => {
                self.pending_hunter = Some(h);
                self.resume_phase = next;
                self.phase = Phase::HunterWindow;
            }
            None => self.enter(next),
        }
    }

    fn kill(&mut self, seat: Seat, cause: DeathCause) {
        self.alive.remove(&seat);
        if self.sheriff == Some(seat) {
            // Badge is destroyed, never transferred.
            self.sheriff = None;
        }
        if self.role_of(seat) == Some(Role::Hunter) {
            self.hunter_death_cause = Some(cause);
        }
    }

    fn finish_if_won(&mut self) -> bool {
        match self.check_win() {
            Some(winner) => {
                self.winner = Some(winner);
                self.phase = Phase::GameOver;
                self.pending_hunter = None;
                self.events.push(GameEvent::GameOver {
                    winner,
                    total_rounds: self.round,
                });
                true
            }
            None => false,
        }
    }

    /// Alive seats (minus `skip`) in cyclic order from `start`.
    fn rotation(&self, start: Seat, direction: Direction, skip: Option<Seat>) -> Vec<Seat> {
        let mut seats: Vec<Seat> = self
            .alive
            .iter()
            .copied()
            .filter(|s| Some(*s) != skip)
            .collect();
        if direction == Direction::Descending {
            seats.reverse();
        }
        let pos = seats.iter().position(|s| *s == start).unwrap_or(0);
        seats.rotate_left(pos);
        seats
    }

    fn enter(&mut self, phase: Phase) {
        self.phase = phase;
        match phase {
            Phase::Night => self.night = NightProgress::default(),
            Phase::Election => {
                self.election_candidates = self.alive.clone();
                self.election_runoff = false;
            }
            Phase::Speeches => {
                self.speech_cursor = 0;
                self.order_chosen = false;
                if self.sheriff.is_none() {
                    // Ascending, starting after the first announced death.
                    let start = match self.last_night_deaths.first() {
                        Some(d) => self
                            .alive
                            .range(Seat(d.0.saturating_add(1))..)
                            .next()
                            .or_else(|| self.alive.iter().next()),
                        None => self.alive.iter().next(),
                    }
                    .copied()
                    .expect("someone is alive");
                    let order = self.rotation(start, Direction::Ascending, None);
                    self.events.push(GameEvent::SpeakingOrder {
                        order: order.clone(),
                        start: None,
                        direction: Direction::Ascending,
                    });
                    self.speaking_order = order;
                    self.order_chosen = true;
                }
            }
            Phase::TieDebate => {
                self.events.push(GameEvent::TieDebate {
                    tied: self.tied.clone(),
                });
                self.speaking_order = self.tied.iter().copied().collect();
                self.speech_cursor = 0;
            }
            Phase::PseudoVote => self.pseudo_tally = None,
            _ => {}
        }
    }
}
