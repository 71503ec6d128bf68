use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::event::{Direction, VoteKind};
use super::types::{Camp, Seat};
use super::vote::TallyResult;

/// The decision an agent is asked to make.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RequestKind {
    WolfProposal,
    GuardTarget,
    SeerTarget,
    WitchDecision {
        victim: Seat,
        heal_available: bool,
        poison_available: bool,
        both_allowed: bool,
    },
    HunterShot,
    ElectionBallot,
    Speech {
        debate: bool,
    },
    PseudoBallot,
    SheriffSummary {
        tally: TallyResult,
    },
    Inference,
    OfficialBallot,
    TiebreakBallot,
    SpeakingOrderChoice,
}

impl RequestKind {
    pub fn tag(&self) -> RequestTag {
        match self {
            RequestKind::WolfProposal => RequestTag::WolfProposal,
            RequestKind::GuardTarget => RequestTag::GuardTarget,
            RequestKind::SeerTarget => RequestTag::SeerTarget,
            RequestKind::WitchDecision { .. } => RequestTag::WitchDecision,
            RequestKind::HunterShot => RequestTag::HunterShot,
            RequestKind::ElectionBallot => RequestTag::ElectionBallot,
            RequestKind::Speech { .. } => RequestTag::Speech,
            RequestKind::PseudoBallot => RequestTag::PseudoBallot,
            RequestKind::SheriffSummary { .. } => RequestTag::SheriffSummary,
            RequestKind::Inference => RequestTag::Inference,
            RequestKind::OfficialBallot => RequestTag::OfficialBallot,
            RequestKind::TiebreakBallot => RequestTag::TiebreakBallot,
            RequestKind::SpeakingOrderChoice => RequestTag::SpeakingOrderChoice,
        }
    }
}

/// Payload-free discriminant of [`RequestKind`] / [`AgentResponse`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestTag {
    WolfProposal,
    GuardTarget,
    SeerTarget,
    WitchDecision,
    HunterShot,
    ElectionBallot,
    Speech,
    PseudoBallot,
    SheriffSummary,
    Inference,
    OfficialBallot,
    TiebreakBallot,
    SpeakingOrderChoice,
}

impl RequestTag {
    pub const ALL: [RequestTag; 13] = [
        RequestTag::WolfProposal,
        RequestTag::GuardTarget,
        RequestTag::SeerTarget,
        RequestTag::WitchDecision,
        RequestTag::HunterShot,
        RequestTag::ElectionBallot,
        RequestTag::Speech,
        RequestTag::PseudoBallot,
        RequestTag::SheriffSummary,
        RequestTag::Inference,
        RequestTag::OfficialBallot,
        RequestTag::TiebreakBallot,
        RequestTag::SpeakingOrderChoice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RequestTag::WolfProposal => "wolf_proposal",
            RequestTag::GuardTarget => "guard_target",
            RequestTag::SeerTarget => "seer_target",
            RequestTag::WitchDecision => "witch_decision",
            RequestTag::HunterShot => "hunter_shot",
            RequestTag::ElectionBallot => "election_ballot",
            RequestTag::Speech => "speech",
            RequestTag::PseudoBallot => "pseudo_ballot",
            RequestTag::SheriffSummary => "sheriff_summary",
            RequestTag::Inference => "inference",
            RequestTag::OfficialBallot => "official_ballot",
            RequestTag::TiebreakBallot => "tiebreak_ballot",
            RequestTag::SpeakingOrderChoice => "speaking_order",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.name() == name)
    }

    pub fn vote_kind(self) -> Option<VoteKind> {
        match self {
            RequestTag::ElectionBallot => Some(VoteKind::Election),
            RequestTag::PseudoBallot => Some(VoteKind::Pseudo),
            RequestTag::OfficialBallot => Some(VoteKind::Official),
            RequestTag::TiebreakBallot => Some(VoteKind::Tiebreak),
            _ => None,
        }
    }
}

impl fmt::Display for RequestTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One pending decision: who must answer, what, and which seats are legal
/// targets. Abstaining or declining is modelled in the response, not here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionRequest {
    pub seat: Seat,
    #[serde(flatten)]
    pub kind: RequestKind,
    pub legal_targets: BTreeSet<Seat>,
}

impl ActionRequest {
    pub fn tag(&self) -> RequestTag {
        self.kind.tag()
    }

    /// Deterministic legal default: abstain or decline where allowed,
    /// otherwise the lowest legal seat.
    pub fn fallback(&self) -> AgentResponse {
        let lowest = || {
            *self
                .legal_targets
                .iter()
                .next()
                .expect("target kinds always have legal targets")
        };
        match &self.kind {
            RequestKind::WolfProposal => AgentResponse::WolfProposal { target: lowest() },
            RequestKind::GuardTarget => AgentResponse::GuardTarget { target: lowest() },
            RequestKind::SeerTarget => AgentResponse::SeerTarget { target: lowest() },
            RequestKind::WitchDecision { .. } => AgentResponse::WitchDecision {
                heal: false,
                poison: None,
            },
            RequestKind::HunterShot => AgentResponse::HunterShot { target: None },
            RequestKind::Speech { .. } => AgentResponse::Speech {
                text: "I pass.".to_string(),
            },
            RequestKind::SheriffSummary { .. } => AgentResponse::SheriffSummary {
                recommended: lowest(),
                text: "No summary.".to_string(),
            },
            RequestKind::Inference => AgentResponse::Inference {
                claims: BTreeMap::new(),
            },
            RequestKind::SpeakingOrderChoice => AgentResponse::SpeakingOrderChoice {
                start: lowest(),
                direction: Direction::Ascending,
            },
            RequestKind::ElectionBallot
            | RequestKind::PseudoBallot
            | RequestKind::OfficialBallot
            | RequestKind::TiebreakBallot => {
                AgentResponse::ballot_for(self.tag(), None).expect("ballot kind")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentResponse {
    WolfProposal {
        target: Seat,
    },
    GuardTarget {
        target: Seat,
    },
    SeerTarget {
        target: Seat,
    },
    /// Heal always applies to the announced victim.
    WitchDecision {
        heal: bool,
        poison: Option<Seat>,
    },
    HunterShot {
        target: Option<Seat>,
    },
    ElectionBallot {
        target: Option<Seat>,
    },
    Speech {
        text: String,
    },
    PseudoBallot {
        target: Option<Seat>,
    },
    SheriffSummary {
        recommended: Seat,
        text: String,
    },
    Inference {
        claims: BTreeMap<Seat, Camp>,
    },
    OfficialBallot {
        target: Option<Seat>,
    },
    TiebreakBallot {
        target: Option<Seat>,
    },
    SpeakingOrderChoice {
        start: Seat,
        direction: Direction,
    },
}

impl AgentResponse {
    pub fn tag(&self) -> RequestTag {
        match self {
            AgentResponse::WolfProposal { .. } => RequestTag::WolfProposal,
            AgentResponse::GuardTarget { .. } => RequestTag::GuardTarget,
            AgentResponse::SeerTarget { .. } => RequestTag::SeerTarget,
            AgentResponse::WitchDecision { .. } => RequestTag::WitchDecision,
            AgentResponse::HunterShot { .. } => RequestTag::HunterShot,
            AgentResponse::ElectionBallot { .. } => RequestTag::ElectionBallot,
            AgentResponse::Speech { .. } => RequestTag::Speech,
            AgentResponse::PseudoBallot { .. } => RequestTag::PseudoBallot,
            AgentResponse::SheriffSummary { .. } => RequestTag::SheriffSummary,
            AgentResponse::Inference { .. } => RequestTag::Inference,
            AgentResponse::OfficialBallot { .. } => RequestTag::OfficialBallot,
            AgentResponse::TiebreakBallot { .. } => RequestTag::TiebreakBallot,
            AgentResponse::SpeakingOrderChoice { .. } => RequestTag::SpeakingOrderChoice,
        }
    }

    /// Ballot for vote kinds, `None` for everything else.
    pub fn ballot(&self) -> Option<Option<Seat>> {
        match self {
            AgentResponse::ElectionBallot { target }
            | AgentResponse::PseudoBallot { target }
            | AgentResponse::OfficialBallot { target }
            | AgentResponse::TiebreakBallot { target } => Some(*target),
            _ => None,
        }
    }

    /// Builds a ballot response of the given vote kind.
    pub fn ballot_for(tag: RequestTag, target: Option<Seat>) -> Option<Self> {
        Some(match tag {
            RequestTag::ElectionBallot => AgentResponse::ElectionBallot { target },
            RequestTag::PseudoBallot => AgentResponse::PseudoBallot { target },
            RequestTag::OfficialBallot => AgentResponse::OfficialBallot { target },
            RequestTag::TiebreakBallot => AgentResponse::TiebreakBallot { target },
            _ => return None,
        })
    }
}
