use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::event::DeathCause;
use super::types::Seat;

/// Everything submitted during one night.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightActions {
    pub wolf_proposals: BTreeMap<Seat, Seat>,
    pub guard_target: Option<Seat>,
    pub seer_target: Option<Seat>,
    pub witch_heal: bool,
    pub witch_poison_target: Option<Seat>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NightOutcome {
    pub wolf_victim: Option<Seat>,
    /// Ascending by seat; at most one entry per seat.
    pub deaths: Vec<(Seat, DeathCause)>,
    /// `(target, is_werewolf)`.
    pub seer_verdict: Option<(Seat, bool)>,
    pub pending_hunter: Option<Seat>,
}

/// Wolf consensus: a strict majority of proposals wins outright; otherwise
/// the lowest-seat alive wolf whose proposal is among the most-proposed
/// targets decides. Returns `None` when nobody proposed.
pub fn resolve_wolf_target(proposals: &BTreeMap<Seat, Seat>, alive_wolves: &[Seat]) -> Option<Seat> {
    if proposals.is_empty() {
        return None;
    }
    let mut counts: BTreeMap<Seat, usize> = BTreeMap::new();
    for target in proposals.values() {
        *counts.entry(*target).or_insert(0) += 1;
    }
    let top = *counts.values().max()?;
    if top * 2 > proposals.len() {
        return counts.iter().find(|(_, c)| **c == top).map(|(s, _)| *s);
    }
    let mut wolves: Vec<Seat> = alive_wolves.to_vec();
    wolves.sort();
    wolves
        .iter()
        .filter_map(|w| proposals.get(w))
        .find(|t| counts[t] == top)
        .copied()
}
