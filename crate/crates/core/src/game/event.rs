use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::types::{Camp, Role, Seat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeathCause {
    WolfKill,
    Poison,
    Exile,
    HunterShot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NightActionKind {
    WolfProposal,
    Guard,
    WitchHeal,
    WitchPoison,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VoteKind {
    Election,
    Pseudo,
    Official,
    Tiebreak,
}

impl VoteKind {
    /// Official and tiebreak ballots decide exiles.
    pub fn is_binding(self) -> bool {
        matches!(self, VoteKind::Official | VoteKind::Tiebreak)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Ascending,
    Descending,
}

/// One engine-emitted log record. The event stream alone reconstructs every
/// state transition; metrics read nothing else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GameEvent {
    RoleAssigned {
        seat: Seat,
        role: Role,
        model_tag: String,
    },
    RoundStarted {
        round: u32,
    },
    NightAction {
        kind: NightActionKind,
        actor: Seat,
        target: Seat,
    },
    /// The wolves' agreed victim for the night.
    WolfTarget {
        target: Seat,
    },
    SeerResult {
        seer: Seat,
        target: Seat,
        is_werewolf: bool,
    },
    WitchInformed {
        witch: Seat,
        victim: Seat,
    },
    Death {
        seat: Seat,
        cause: DeathCause,
    },
    /// Public dawn announcement; causes stay hidden.
    NightDeaths {
        seats: Vec<Seat>,
    },
    /// `target: None` records a declined shot.
    HunterShot {
        hunter: Seat,
        target: Option<Seat>,
    },
    ElectionRunoff {
        candidates: BTreeSet<Seat>,
    },
    SheriffElected {
        seat: Seat,
    },
    SpeakingOrder {
        order: Vec<Seat>,
        start: Option<Seat>,
        direction: Direction,
    },
    Speech {
        seat: Seat,
        text: String,
        #[serde(default)]
        debate: bool,
    },
    VoteCast {
        kind: VoteKind,
        voter: Seat,
        target: Option<Seat>,
        weight: f64,
    },
    SheriffSummary {
        sheriff: Seat,
        recommended: Seat,
        text: String,
    },
    IdentityInference {
        seat: Seat,
        claims: BTreeMap<Seat, Camp>,
    },
    TieDebate {
        tied: BTreeSet<Seat>,
    },
    Exile {
        seat: Seat,
    },
    NoExile,
    GameOver {
        winner: Camp,
        total_rounds: u32,
    },
}

/// Who may see an event in their agent context.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Audience {
    Public,
    Seat(Seat),
    Wolves,
    /// Log-only (metrics and replay).
    Nobody,
}

impl GameEvent {
    pub fn audience(&self) -> Audience {
        use GameEvent::*;
        match self {
            RoleAssigned { seat, .. } => Audience::Seat(*seat),
            NightAction {
                kind: NightActionKind::WolfProposal,
                ..
            }
            | WolfTarget { .. } => Audience::Wolves,
            NightAction { actor, .. } => Audience::Seat(*actor),
            SeerResult { seer, .. } => Audience::Seat(*seer),
            WitchInformed { witch, .. } => Audience::Seat(*witch),
            IdentityInference { seat, .. } => Audience::Seat(*seat),
            Death {
                cause: DeathCause::WolfKill | DeathCause::Poison,
                ..
            } => Audience::Nobody,
            _ => Audience::Public,
        }
    }

    /// Whether `seat` (holding `role`) may see this event.
    pub fn visible_to(&self, seat: Seat, role: Role) -> bool {
        match self.audience() {
            Audience::Public => true,
            Audience::Seat(s) => s == seat,
            Audience::Wolves => role == Role::Werewolf,
            Audience::Nobody => false,
        }
    }
}
