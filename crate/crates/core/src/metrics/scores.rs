use std::collections::BTreeMap;

use super::view::GameLogView;
use crate::game::{Camp, DeathCause, GameConfig, Role, Seat, VoteKind};

/// Weights and interpretation switches for the character scores.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub alpha_guard: f64,
    pub alpha_wolf: f64,
    pub alpha_kre: f64,
    /// Guard second term counts "the guarded seat died that night" instead
    /// of "the guard stopped the wolves' kill".
    pub guard_literal: bool,
}

impl Default for ScoreParams {
    fn default() -> Self {
        Self {
            alpha_guard: 0.5,
            alpha_wolf: 0.5,
            alpha_kre: 0.5,
            guard_literal: false,
        }
    }
}

impl ScoreParams {
    pub fn from_config(c: &GameConfig, guard_literal: bool) -> Self {
        Self {
            alpha_guard: c.alpha_guard,
            alpha_wolf: c.alpha_wolf,
            alpha_kre: c.alpha_kre,
            guard_literal,
        }
    }
}

/// Distinct werewolves investigated over werewolves in the game.
pub fn seer_score(v: &GameLogView) -> Option<f64> {
    v.seats_with(Role::Seer).first()?;
    let wolves = v.wolves();
    let found: std::collections::BTreeSet<Seat> = v
        .seer_checks
        .iter()
        .map(|(_, t)| *t)
        .filter(|t| wolves.contains(t))
        .collect();
    Some(found.len() as f64 / wolves.len() as f64)
}

/// (heals on good seats + poisons on wolves) over potions used; absent when
/// no potion was used.
pub fn witch_score(v: &GameLogView) -> Option<f64> {
    v.seats_with(Role::Witch).first()?;
    let used = v.witch_heals.len() + v.witch_poisons.len();
    if used == 0 {
        return None;
    }
    let good_heals = v.witch_heals.iter().filter(|(_, t)| !v.is_wolf(*t)).count();
    let wolf_poisons = v.witch_poisons.iter().filter(|(_, t)| v.is_wolf(*t)).count();
    Some((good_heals + wolf_poisons) as f64 / used as f64)
}

/// 1 when the shot hit a werewolf, 0 otherwise; absent if never fired.
pub fn hunter_score(v: &GameLogView) -> Option<f64> {
    let target = v.hunter_shots.iter().find_map(|(_, t)| *t)?;
    Some(if v.is_wolf(target) { 1.0 } else { 0.0 })
}

/// Whether a guard on `target` in `round` counts in the second term.
fn guard_effect(v: &GameLogView, round: u32, target: Seat, literal: bool) -> bool {
    let night_death = v
        .deaths
        .get(&target)
        .filter(|(r, _)| *r == round)
        .map(|(_, c)| *c);
    if literal {
        matches!(night_death, Some(DeathCause::WolfKill | DeathCause::Poison))
    } else {
        v.wolf_targets.get(&round) == Some(&target) && night_death != Some(DeathCause::WolfKill)
    }
}

/// Mean over guard attempts of α·[target good] + (1−α)·[kill prevented].
pub fn guard_score(v: &GameLogView, alpha: f64, literal: bool) -> Option<f64> {
    if v.guard_targets.is_empty() {
        return None;
    }
    let total: f64 = v
        .guard_targets
        .iter()
        .map(|(round, t)| {
            let good = if v.is_wolf(*t) { 0.0 } else { 1.0 };
            let effect = if guard_effect(v, *round, *t, literal) { 1.0 } else { 0.0 };
            alpha * good + (1.0 - alpha) * effect
        })
        .sum();
    Some(total / v.guard_targets.len() as f64)
}

/// α·(rounds survived / total rounds) + (1−α)·[alive at the end]. The
/// round of death counts as survived.
pub fn werewolf_score(v: &GameLogView, seat: Seat, alpha: f64) -> Option<f64> {
    if !v.is_wolf(seat) {
        return None;
    }
    let (survived, alive) = match v.deaths.get(&seat) {
        Some((r, _)) => (*r, 0.0),
        None => (v.total_rounds, 1.0),
    };
    Some(alpha * f64::from(survived) / f64::from(v.total_rounds) + (1.0 - alpha) * alive)
}

/// Character score of the seat's role in this game, if defined.
pub fn character_score(v: &GameLogView, seat: Seat, p: &ScoreParams) -> Option<f64> {
    match v.roles.get(&seat)? {
        Role::Seer => seer_score(v),
        Role::Witch => witch_score(v),
        Role::Hunter => hunter_score(v),
        Role::Guard => guard_score(v, p.alpha_guard, p.guard_literal),
        Role::Werewolf => werewolf_score(v, seat, p.alpha_wolf),
        Role::Villager => None,
    }
}

/// Ratio accumulator for pooled metrics.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Ratio {
    pub num: f64,
    pub den: f64,
}

impl Ratio {
    pub fn add(&mut self, other: Ratio) {
        self.num += other.num;
        self.den += other.den;
    }

    pub fn value(&self) -> Option<f64> {
        (self.den > 0.0).then(|| self.num / self.den)
    }
}

/// One pseudo → recommendation → official sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct SheriffRound {
    pub round: u32,
    pub sheriff: Seat,
    pub camp: Camp,
    pub model: String,
    /// Non-sheriff voters whose official ballot moved off their pseudo
    /// ballot onto the recommendation, over non-sheriff official ballots.
    pub ratio: Ratio,
}

pub fn sheriff_rounds(v: &GameLogView) -> Vec<SheriffRound> {
    v.sheriff_summaries
        .iter()
        .map(|(round, sheriff, recommended)| {
            let of_kind = |kind: VoteKind| -> BTreeMap<Seat, Option<Seat>> {
                v.ballots
                    .iter()
                    .filter(|b| b.round == *round && b.kind == kind && b.voter != *sheriff)
                    .map(|b| (b.voter, b.target))
                    .collect()
            };
            let pseudo = of_kind(VoteKind::Pseudo);
            let official = of_kind(VoteKind::Official);
            let switched = official
                .iter()
                .filter(|(voter, target)| **target == Some(*recommended) && pseudo.get(voter) != Some(target))
                .count();
            SheriffRound {
                round: *round,
                sheriff: *sheriff,
                camp: v.camp(*sheriff).unwrap_or(Camp::Good),
                model: v.model(*sheriff).to_string(),
                ratio: Ratio {
                    num: switched as f64,
                    den: official.len() as f64,
                },
            }
        })
        .collect()
}

/// Correct camp claims over claims, for one seat. Claims about seats
/// already dead at inference time are ignored.
pub fn irp_ratio(v: &GameLogView, seat: Seat) -> Ratio {
    let mut r = Ratio::default();
    for inf in v.inferences.iter().filter(|i| i.seat == seat) {
        for (target, camp) in inf.claims.iter().filter(|(t, _)| inf.alive.contains(t)) {
            r.den += 1.0;
            if v.camp(*target) == Some(*camp) {
                r.num += 1.0;
            }
        }
    }
    r
}

/// Binding ballots on werewolves over binding ballots (abstains included);
/// empty for wolf seats.
pub fn vss_ratio(v: &GameLogView, seat: Seat) -> Ratio {
    let mut r = Ratio::default();
    if v.camp(seat) != Some(Camp::Good) {
        return r;
    }
    for b in v.ballots.iter().filter(|b| b.voter == seat && b.kind.is_binding()) {
        r.den += 1.0;
        if b.target.is_some_and(|t| v.is_wolf(t)) {
            r.num += 1.0;
        }
    }
    r
}

/// God-role instance: alive at the end, and its character score if defined.
#[derive(Debug, Clone, PartialEq)]
pub struct GodInstance {
    pub seat: Seat,
    pub role: Role,
    pub survived: bool,
    pub score: Option<f64>,
}

pub fn god_instances(v: &GameLogView, p: &ScoreParams) -> Vec<GodInstance> {
    v.roles
        .iter()
        .filter(|(_, r)| r.is_god())
        .map(|(s, r)| GodInstance {
            seat: *s,
            role: *r,
            survived: v.alive_at_end(*s),
            score: character_score(v, *s, p),
        })
        .collect()
}

/// α·(surviving instances / instances) + (1−α)·mean(available scores).
/// With no score available the survival rate alone is returned.
pub fn kre_from_instances<'a>(instances: impl IntoIterator<Item = &'a GodInstance>, alpha: f64) -> Option<f64> {
    let (mut n, mut alive, mut score_sum, mut scored) = (0usize, 0usize, 0.0, 0usize);
    for g in instances {
        n += 1;
        alive += usize::from(g.survived);
        if let Some(s) = g.score {
            score_sum += s;
            scored += 1;
        }
    }
    if n == 0 {
        return None;
    }
    let survival = alive as f64 / n as f64;
    if scored == 0 {
        return Some(survival);
    }
    Some(alpha * survival + (1.0 - alpha) * score_sum / scored as f64)
}
