use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::event::VoteKind;
use super::types::Seat;

pub const SHERIFF_WEIGHT: f64 = 1.5;

/// One ballot collection. `None` ballots are abstentions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VoteRound {
    pub kind: VoteKind,
    pub ballots: BTreeMap<Seat, Option<Seat>>,
    pub weights: BTreeMap<Seat, f64>,
}

/// Ballot weight of `voter`: the sheriff counts 1.5 in binding rounds only.
pub fn ballot_weight(kind: VoteKind, voter: Seat, sheriff: Option<Seat>) -> f64 {
    if kind.is_binding() && sheriff == Some(voter) {
        SHERIFF_WEIGHT
    } else {
        1.0
    }
}

impl VoteRound {
    pub fn new(kind: VoteKind, ballots: BTreeMap<Seat, Option<Seat>>, sheriff: Option<Seat>) -> Self {
        let weights = ballots
            .keys()
            .map(|v| (*v, ballot_weight(kind, *v, sheriff)))
            .collect();
        Self {
            kind,
            ballots,
            weights,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", content = "seats", rename_all = "snake_case")]
pub enum TallyOutcome {
    Unique(Seat),
    Tied(BTreeSet<Seat>),
    /// Every ballot abstained (or there were none).
    NoExile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TallyResult {
    pub totals: BTreeMap<Seat, f64>,
    pub outcome: TallyOutcome,
}

/// Weighted plurality count.
pub fn tally_votes(round: &VoteRound) -> TallyResult {
    let mut totals: BTreeMap<Seat, f64> = BTreeMap::new();
    for (voter, target) in &round.ballots {
        if let Some(t) = target {
            let w = round.weights.get(voter).copied().unwrap_or(1.0);
            *totals.entry(*t).or_insert(0.0) += w;
        }
    }
    let best = totals.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let leaders: BTreeSet<Seat> = totals
        .iter()
        .filter(|(_, v)| **v == best)
        .map(|(s, _)| *s)
        .collect();
    let outcome = match leaders.len() {
        0 => TallyOutcome::NoExile,
        1 => TallyOutcome::Unique(*leaders.iter().next().unwrap()),
        _ => TallyOutcome::Tied(leaders),
    };
    TallyResult { totals, outcome }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ElectionStep {
    Elected(Seat),
    Runoff(BTreeSet<Seat>),
}

/// Sheriff election rule: plurality; a tie (or a fully abstaining ballot)
/// goes to one runoff among the tied seats (all candidates when everyone
/// abstained); a runoff that still ties elects the lowest tied seat.
pub fn election_step(round: &VoteRound, candidates: &BTreeSet<Seat>, is_runoff: bool) -> ElectionStep {
    let tally = tally_votes(round);
    let tied = match tally.outcome {
        TallyOutcome::Unique(s) => return ElectionStep::Elected(s),
        TallyOutcome::Tied(t) => t,
        TallyOutcome::NoExile => candidates.clone(),
    };
    if is_runoff {
        ElectionStep::Elected(*tied.iter().next().expect("nonempty candidate set"))
    } else {
        ElectionStep::Runoff(tied)
    }
}
