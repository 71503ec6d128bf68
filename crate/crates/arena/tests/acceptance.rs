//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Every check compares the crates under
//! test against an oracle written here from the game rules alone.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use werewolf_arena::report::load_logs;
use werewolf_arena::{replay, Arena, ExperimentConfig};
use werewolf_core::agent::AgentContext;
use werewolf_core::game::{
    new_game, tally_votes, Camp, DeathCause, GameConfig, GameEvent, NightActionKind, RequestKind, Role, Seat,
    TallyOutcome, VoteKind, VoteRound,
};
use werewolf_core::log::GameLog;
use werewolf_core::memory::{
    reward_for, Experience, ExperiencePool, ExperienceTags, GameOutcomeRecord, HashEmbedder, RetrievalConfig,
    TagFilter,
};
use werewolf_core::metrics::{build_report, render_table, MetricReport, MetricRow, ScoredGame};
use werewolf_core::rng::SplitMix64;

/// Metric agreement tolerance.
const METRIC_TOL: f64 = 1e-9;
/// Wall-clock budget for the rule-compliance batch.
const RULE_BUDGET: Duration = Duration::from_secs(60);

type Outcome = Result<String, String>;

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("rule-compliance", rule_compliance),
        ("determinism", determinism),
        ("win-condition-oracle", win_condition_oracle),
        ("vote-tally", vote_tally),
        ("metric-oracle-equivalence", metric_oracle_equivalence),
        ("reward-law", reward_law),
        ("retrieval-correctness", retrieval_correctness),
        ("board-compositions", board_compositions),
        ("end-to-end-smoke", end_to_end_smoke),
        ("information-hiding", information_hiding),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let start = Instant::now();
        let result = std::panic::catch_unwind(check).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.2}s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.2}s]");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn arena(body: &str, out: &Path) -> Arena {
    let mut cfg = ExperimentConfig::from_toml(body).expect("valid config");
    cfg.output_dir = out.to_path_buf();
    Arena::new(cfg).expect("arena")
}

fn play_in_memory(body: &str, games: u64) -> Vec<GameLog> {
    let dir = tempfile::tempdir().unwrap();
    let a = arena(body, dir.path());
    (0..games).map(|i| a.play(i).log).collect()
}

fn events(log: &GameLog) -> Vec<GameEvent> {
    log.events().cloned().collect()
}

/// Eight rule variants over both boards, all played by random agents.
fn random_configs() -> Vec<String> {
    let mut v = Vec::new();
    for (n, sheriff) in [(8, true), (8, false), (12, true), (12, false)] {
        for (i, extra) in [
            "",
            "witch_both_potions_same_night = true\nhunter_shoots_when_poisoned = true\nguard_save_interaction = \"die\"\n",
        ]
        .iter()
        .enumerate()
        {
            v.push(format!(
                "master_seed = {}\n[game]\nn_players = {n}\nsheriff_enabled = {sheriff}\n{extra}[assignment]\n\"*\" = \"random\"\n",
                1000 + n * 10 + i
            ));
        }
    }
    v
}

fn random_games(total: u64) -> Vec<GameLog> {
    let configs = random_configs();
    let per = total / configs.len() as u64;
    configs.iter().flat_map(|c| play_in_memory(c, per)).collect()
}

// ---------------------------------------------------------------------------
// Rule compliance

fn audit(log: &GameLog) -> Vec<String> {
    let cfg = &log.header().game_config;
    let mut v = Vec::new();
    let mut roles = BTreeMap::new();
    let mut dead: BTreeMap<Seat, DeathCause> = BTreeMap::new();
    let mut round = 0;
    let mut guard_by_round: BTreeMap<u32, Seat> = BTreeMap::new();
    let (mut heals, mut poisons, mut shots) = (0, 0, 0);
    let mut potions_this_round: BTreeMap<u32, usize> = BTreeMap::new();
    let alive = |s: &Seat, dead: &BTreeMap<Seat, DeathCause>| !dead.contains_key(s);
    for e in log.events() {
        match e {
            GameEvent::RoleAssigned { seat, role, .. } => {
                roles.insert(*seat, *role);
            }
            GameEvent::RoundStarted { round: r } => round = *r,
            GameEvent::NightAction { kind, actor, target } => {
                if !alive(actor, &dead) {
                    v.push(format!("round {round}: dead {actor} acted ({kind:?})"));
                }
                match kind {
                    NightActionKind::Guard => {
                        if round > 1 && guard_by_round.get(&(round - 1)) == Some(target) {
                            v.push(format!("round {round}: guard repeated {target}"));
                        }
                        guard_by_round.insert(round, *target);
                    }
                    NightActionKind::WitchHeal | NightActionKind::WitchPoison => {
                        if *kind == NightActionKind::WitchHeal {
                            heals += 1;
                        } else {
                            poisons += 1;
                        }
                        *potions_this_round.entry(round).or_default() += 1;
                        if !cfg.witch_both_potions_same_night && potions_this_round[&round] > 1 {
                            v.push(format!("round {round}: both potions in one night"));
                        }
                    }
                    NightActionKind::WolfProposal => {
                        if roles.get(actor) != Some(&Role::Werewolf) {
                            v.push(format!("round {round}: non-wolf {actor} proposed a kill"));
                        }
                    }
                }
            }
            GameEvent::SeerResult { seer, .. } if !alive(seer, &dead) => v.push(format!("dead seer {seer} checked")),
            GameEvent::VoteCast { voter, .. } if !alive(voter, &dead) => v.push(format!("dead {voter} voted")),
            GameEvent::Speech { seat, .. } if !alive(seat, &dead) => v.push(format!("dead {seat} spoke")),
            GameEvent::SheriffSummary { sheriff, .. } if !alive(sheriff, &dead) => {
                v.push(format!("dead sheriff {sheriff} summarized"))
            }
            GameEvent::IdentityInference { seat, .. } if !alive(seat, &dead) => v.push(format!("dead {seat} inferred")),
            GameEvent::HunterShot { hunter, target } => {
                shots += 1;
                match dead.get(hunter) {
                    None => v.push(format!("living hunter {hunter} shot")),
                    Some(DeathCause::Poison) if !cfg.hunter_shoots_when_poisoned => {
                        v.push("poisoned hunter got a shot".into())
                    }
                    _ => {}
                }
                if let Some(t) = target {
                    if !alive(t, &dead) {
                        v.push(format!("hunter shot dead {t}"));
                    }
                }
            }
            GameEvent::Death { seat, cause } => {
                if dead.insert(*seat, *cause).is_some() {
                    v.push(format!("{seat} died twice"));
                }
            }
            _ => {}
        }
    }
    if heals > 1 || poisons > 1 {
        v.push(format!("potions reused: {heals} heals, {poisons} poisons"));
    }
    if shots > 1 {
        v.push(format!("{shots} hunter shots"));
    }
    v
}

fn rule_compliance() -> Outcome {
    let start = Instant::now();
    let logs = random_games(200);
    let elapsed = start.elapsed();
    let mut violations = Vec::new();
    let mut finished = 0;
    for (i, log) in logs.iter().enumerate() {
        if log.is_complete() {
            finished += 1;
        } else {
            violations.push(format!("game {i} did not finish: {:?}", log.aborted()));
        }
        violations.extend(audit(log).into_iter().map(|m| format!("game {i}: {m}")));
    }
    let summary = format!(
        "{} games ({finished} finished), {} violations, {:.2}s of play",
        logs.len(),
        violations.len(),
        elapsed.as_secs_f64()
    );
    if logs.len() != 200 || !violations.is_empty() || elapsed >= RULE_BUDGET {
        return Err(format!("{summary}; first: {:?}", violations.first()));
    }
    Ok(summary)
}

// ---------------------------------------------------------------------------
// Determinism

fn determinism() -> Outcome {
    let body = "n_games = 10\nmaster_seed = 2024\n[game]\nn_players = 8\nsheriff_enabled = true\n[assignment]\ngood = \"mock\"\nwolf = \"mock\"\n";
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    arena(body, a.path()).run().map_err(|e| e.to_string())?;
    let mut second = ExperimentConfig::from_toml(body).unwrap();
    second.output_dir = b.path().to_path_buf();
    second.parallelism = 4;
    Arena::new(second).unwrap().run().map_err(|e| e.to_string())?;
    let mut identical = 0;
    let mut replayed = 0;
    for i in 0..10 {
        let name = format!("logs/game_{i:04}.jsonl");
        let x = std::fs::read(a.path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
        let y = std::fs::read(b.path().join(&name)).map_err(|e| format!("{name}: {e}"))?;
        if x != y {
            return Err(format!("{name} differs between runs"));
        }
        identical += 1;
        let log = GameLog::parse(std::str::from_utf8(&x).unwrap()).map_err(|e| e.to_string())?;
        let verdict = replay(&log);
        if !verdict.passed() || !log.is_complete() {
            return Err(format!("{name}: {verdict}"));
        }
        replayed += 1;
    }
    Ok(format!("{identical}/10 logs byte-identical, {replayed}/10 replay PASS"))
}

// ---------------------------------------------------------------------------
// Win condition

fn brute_win(roles: &BTreeMap<Seat, Role>, alive: &BTreeSet<Seat>) -> Option<Camp> {
    let wolves = alive.iter().filter(|s| roles[s] == Role::Werewolf).count();
    let others = alive.len() - wolves;
    if wolves == 0 {
        Some(Camp::Good)
    } else if wolves > others {
        Some(Camp::Wolf)
    } else {
        None
    }
}

fn win_condition_oracle() -> Outcome {
    let logs: Vec<GameLog> = random_games(200)
        .into_iter()
        .filter(|l| !l.header().game_config.wolf_win_on_equal)
        .collect();
    let mut transitions = 0usize;
    for (gi, log) in logs.iter().enumerate() {
        let mut state = new_game(log.header().game_config.clone()).map_err(|e| e.to_string())?;
        let roles: BTreeMap<Seat, Role> = state.players().iter().map(|p| (p.seat, p.role)).collect();
        let mut inputs = log.inputs();
        loop {
            let brute = brute_win(&roles, state.alive());
            transitions += 1;
            if state.check_win() != brute {
                return Err(format!("game {gi} round {}: check_win {:?}, oracle {brute:?}", state.round(), state.check_win()));
            }
            if state.is_over() != brute.is_some() || (state.is_over() && state.winner() != brute) {
                return Err(format!("game {gi}: over={} winner={:?} but oracle {brute:?}", state.is_over(), state.winner()));
            }
            if state.is_over() {
                break;
            }
            let pending = state.pending_requests();
            let step = if pending.is_empty() {
                state.advance()
            } else {
                let batch: Vec<_> = inputs.by_ref().take(pending.len()).map(|i| (i.seat, i.response.clone())).collect();
                if batch.len() < pending.len() {
                    return Err(format!("game {gi}: log ran out of inputs"));
                }
                state.submit(batch)
            };
            step.map_err(|e| format!("game {gi}: {e}"))?;
        }
    }
    Ok(format!("{} games, {transitions} transitions agree", logs.len()))
}

// ---------------------------------------------------------------------------
// Vote tally

fn vote_tally() -> Outcome {
    let mut rng = SplitMix64::new(77);
    let kinds = [VoteKind::Election, VoteKind::Pseudo, VoteKind::Official, VoteKind::Tiebreak];
    let (mut ties, mut abstains, mut sheriff_binding) = (0, 0, 0);
    for case in 0..10_000 {
        let kind = kinds[rng.below(4)];
        let n = 8 + rng.below(5);
        let voters: Vec<Seat> = (0..n as u8).map(Seat).filter(|_| rng.below(10) > 0).collect();
        let all_abstain = rng.below(20) == 0;
        let ballots: BTreeMap<Seat, Option<Seat>> = voters
            .iter()
            .map(|v| {
                let abstain = all_abstain || rng.below(6) == 0;
                let spread = 3 + rng.below(n - 2);
                (*v, (!abstain).then(|| Seat(rng.below(spread) as u8)))
            })
            .collect();
        let sheriff = (rng.below(2) == 0).then(|| voters.get(rng.below(voters.len().max(1))).copied()).flatten();
        let round = VoteRound::new(kind, ballots.clone(), sheriff);
        let result = tally_votes(&round);

        let binding = matches!(kind, VoteKind::Official | VoteKind::Tiebreak);
        let mut totals: BTreeMap<Seat, f64> = BTreeMap::new();
        for (voter, target) in &ballots {
            let w = if binding && Some(*voter) == sheriff { 1.5 } else { 1.0 };
            if Some(*voter) == sheriff && binding {
                sheriff_binding += 1;
                if round.weights[voter] != 1.5 {
                    return Err(format!("case {case}: sheriff weight {}", round.weights[voter]));
                }
            }
            if let Some(t) = target {
                *totals.entry(*t).or_default() += w;
            }
        }
        let best = totals.values().cloned().fold(0.0, f64::max);
        let leaders: BTreeSet<Seat> = totals.iter().filter(|(_, v)| **v == best).map(|(s, _)| *s).collect();
        let expected = match leaders.len() {
            0 => TallyOutcome::NoExile,
            1 => TallyOutcome::Unique(*leaders.first().unwrap()),
            _ => TallyOutcome::Tied(leaders),
        };
        match &expected {
            TallyOutcome::Tied(_) => ties += 1,
            TallyOutcome::NoExile => abstains += 1,
            TallyOutcome::Unique(_) => {}
        }
        if result.totals != totals || result.outcome != expected {
            return Err(format!("case {case}: got {:?}/{:?}, recount {totals:?}/{expected:?}", result.totals, result.outcome));
        }
    }
    if ties == 0 || abstains == 0 || sheriff_binding == 0 {
        return Err(format!("paths not exercised: ties {ties}, all-abstain {abstains}, sheriff {sheriff_binding}"));
    }
    Ok(format!("10000 rounds match; {ties} ties, {abstains} no-exile, {sheriff_binding} weighted sheriff ballots"))
}

// ---------------------------------------------------------------------------
// Metric oracle

#[derive(Default)]
struct OracleAcc {
    seer: Vec<f64>,
    witch: Vec<f64>,
    hunter: Vec<f64>,
    guard: Vec<f64>,
    wolf: Vec<f64>,
    sheriff: BTreeMap<Camp, (f64, f64)>,
    irp: (f64, f64),
    vss: (f64, f64),
    /// (survived, score) per god instance.
    gods: Vec<(bool, Option<f64>)>,
    alpha_kre: Option<f64>,
}

/// Straight pass over raw events; shares no code with the metrics module.
fn oracle_game(ev: &[GameEvent], cfg: &GameConfig, matchup: &str, accs: &mut BTreeMap<(String, String), OracleAcc>) {
    let mut roles: BTreeMap<Seat, Role> = BTreeMap::new();
    let mut models: BTreeMap<Seat, String> = BTreeMap::new();
    let mut round = 0u32;
    let mut death: BTreeMap<Seat, (u32, DeathCause)> = BTreeMap::new();
    let mut checked: BTreeSet<Seat> = BTreeSet::new();
    let (mut heal_ok, mut poison_ok, mut potions) = (0usize, 0usize, 0usize);
    let mut shot: Option<Seat> = None;
    let mut guards: Vec<(u32, Seat)> = Vec::new();
    let mut wolf_target: BTreeMap<u32, Seat> = BTreeMap::new();
    let mut ballots: Vec<(u32, VoteKind, Seat, Option<Seat>)> = Vec::new();
    let mut summaries: Vec<(u32, Seat, Seat)> = Vec::new();
    let mut irp: BTreeMap<Seat, (f64, f64)> = BTreeMap::new();
    let mut total_rounds = 0u32;
    let is_wolf = |roles: &BTreeMap<Seat, Role>, s: &Seat| roles.get(s) == Some(&Role::Werewolf);
    for e in ev {
        match e {
            GameEvent::RoleAssigned { seat, role, model_tag } => {
                roles.insert(*seat, *role);
                models.insert(*seat, model_tag.clone());
            }
            GameEvent::RoundStarted { round: r } => round = *r,
            GameEvent::SeerResult { target, .. } => {
                if is_wolf(&roles, target) {
                    checked.insert(*target);
                }
            }
            GameEvent::NightAction { kind, target, .. } => match kind {
                NightActionKind::WitchHeal => {
                    potions += 1;
                    heal_ok += usize::from(!is_wolf(&roles, target));
                }
                NightActionKind::WitchPoison => {
                    potions += 1;
                    poison_ok += usize::from(is_wolf(&roles, target));
                }
                NightActionKind::Guard => guards.push((round, *target)),
                NightActionKind::WolfProposal => {}
            },
            GameEvent::WolfTarget { target } => {
                wolf_target.insert(round, *target);
            }
            GameEvent::Death { seat, cause } => {
                death.insert(*seat, (round, *cause));
            }
            GameEvent::HunterShot { target, .. } => {
                if shot.is_none() {
                    shot = *target;
                }
            }
            GameEvent::VoteCast { kind, voter, target, .. } => ballots.push((round, *kind, *voter, *target)),
            GameEvent::SheriffSummary { sheriff, recommended, .. } => summaries.push((round, *sheriff, *recommended)),
            GameEvent::IdentityInference { seat, claims } => {
                let acc = irp.entry(*seat).or_default();
                for (t, camp) in claims {
                    if death.contains_key(t) {
                        continue;
                    }
                    acc.1 += 1.0;
                    let truth = if is_wolf(&roles, t) { Camp::Wolf } else { Camp::Good };
                    if truth == *camp {
                        acc.0 += 1.0;
                    }
                }
            }
            GameEvent::GameOver { total_rounds: t, .. } => total_rounds = *t,
            _ => {}
        }
    }
    let n_wolves = roles.values().filter(|r| **r == Role::Werewolf).count();
    let seer = roles.values().any(|r| *r == Role::Seer).then(|| checked.len() as f64 / n_wolves as f64);
    let witch = (potions > 0).then(|| (heal_ok + poison_ok) as f64 / potions as f64);
    let hunter = shot.map(|t| if is_wolf(&roles, &t) { 1.0 } else { 0.0 });
    let guard = (!guards.is_empty()).then(|| {
        let a = cfg.alpha_guard;
        guards
            .iter()
            .map(|(r, t)| {
                let good = if is_wolf(&roles, t) { 0.0 } else { 1.0 };
                let killed_that_night = death.get(t) == Some(&(*r, DeathCause::WolfKill));
                let blocked = wolf_target.get(r) == Some(t) && !killed_that_night;
                a * good + (1.0 - a) * if blocked { 1.0 } else { 0.0 }
            })
            .sum::<f64>()
            / guards.len() as f64
    });
    let score_of = |role: Role| match role {
        Role::Seer => seer,
        Role::Witch => witch,
        Role::Hunter => hunter,
        Role::Guard => guard,
        _ => None,
    };
    for (seat, role) in &roles {
        let acc = accs.entry((models[seat].clone(), matchup.to_string())).or_default();
        acc.alpha_kre.get_or_insert(cfg.alpha_kre);
        match role {
            Role::Werewolf => {
                let (survived, alive) = match death.get(seat) {
                    Some((r, _)) => (*r, 0.0),
                    None => (total_rounds, 1.0),
                };
                let a = cfg.alpha_wolf;
                acc.wolf.push(a * f64::from(survived) / f64::from(total_rounds) + (1.0 - a) * alive);
            }
            Role::Villager => {}
            god => {
                let s = score_of(*god);
                if let Some(x) = s {
                    match god {
                        Role::Seer => acc.seer.push(x),
                        Role::Witch => acc.witch.push(x),
                        Role::Hunter => acc.hunter.push(x),
                        _ => acc.guard.push(x),
                    }
                }
                acc.gods.push((!death.contains_key(seat), s));
            }
        }
        if let Some((c, n)) = irp.get(seat) {
            acc.irp.0 += c;
            acc.irp.1 += n;
        }
        if *role != Role::Werewolf {
            for (_, kind, voter, target) in &ballots {
                if voter == seat && matches!(kind, VoteKind::Official | VoteKind::Tiebreak) {
                    acc.vss.1 += 1.0;
                    if target.is_some_and(|t| is_wolf(&roles, &t)) {
                        acc.vss.0 += 1.0;
                    }
                }
            }
        }
    }
    for (r, sheriff, rec) in summaries {
        let pseudo: BTreeMap<Seat, Option<Seat>> = ballots
            .iter()
            .filter(|b| b.0 == r && b.1 == VoteKind::Pseudo && b.2 != sheriff)
            .map(|b| (b.2, b.3))
            .collect();
        let (mut moved, mut total) = (0.0, 0.0);
        for b in ballots.iter().filter(|b| b.0 == r && b.1 == VoteKind::Official && b.2 != sheriff) {
            total += 1.0;
            if b.3 == Some(rec) && pseudo.get(&b.2) != Some(&b.3) {
                moved += 1.0;
            }
        }
        let camp = if is_wolf(&roles, &sheriff) { Camp::Wolf } else { Camp::Good };
        let acc = accs.get_mut(&(models[&sheriff].clone(), matchup.to_string())).unwrap();
        let e = acc.sheriff.entry(camp).or_default();
        e.0 += moved;
        e.1 += total;
    }
}

fn oracle_rows(accs: &BTreeMap<(String, String), OracleAcc>) -> BTreeMap<(String, String), [Option<f64>; 10]> {
    let mean = |v: &Vec<f64>| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let ratio = |(n, d): (f64, f64)| (d > 0.0).then(|| n / d);
    accs.iter()
        .map(|(k, a)| {
            let kre = (!a.gods.is_empty()).then(|| {
                let surv = a.gods.iter().filter(|g| g.0).count() as f64 / a.gods.len() as f64;
                let scores: Vec<f64> = a.gods.iter().filter_map(|g| g.1).collect();
                match mean(&scores) {
                    Some(m) => {
                        let alpha = a.alpha_kre.unwrap();
                        alpha * surv + (1.0 - alpha) * m
                    }
                    None => surv,
                }
            });
            let row = [
                mean(&a.seer),
                mean(&a.witch),
                mean(&a.hunter),
                mean(&a.guard),
                mean(&a.wolf),
                a.sheriff.get(&Camp::Good).copied().and_then(ratio),
                a.sheriff.get(&Camp::Wolf).copied().and_then(ratio),
                ratio(a.irp),
                kre,
                ratio(a.vss),
            ];
            (k.clone(), row)
        })
        .collect()
}

fn compare_report(report: &MetricReport, oracle: &BTreeMap<(String, String), [Option<f64>; 10]>) -> Result<usize, String> {
    if report.rows.len() != oracle.len() {
        return Err(format!("{} report rows, oracle has {}", report.rows.len(), oracle.len()));
    }
    let mut cells = 0;
    for row in &report.rows {
        let want = oracle
            .get(&(row.model_tag.clone(), row.matchup.clone()))
            .ok_or_else(|| format!("unexpected row {} / {}", row.model_tag, row.matchup))?;
        for ((got, want), col) in row.values().iter().zip(want).zip(MetricRow::COLUMNS) {
            match (got, want) {
                (None, None) => {}
                (Some(g), Some(w)) if (g - w).abs() <= METRIC_TOL && (0.0..=1.0).contains(g) => cells += 1,
                _ => return Err(format!("{} / {} {col}: module {got:?}, oracle {want:?}", row.model_tag, row.matchup)),
            }
        }
    }
    Ok(cells)
}

fn metric_oracle_equivalence() -> Outcome {
    let mut logs = Vec::new();
    for (i, (n, sheriff)) in [(8, true), (12, false)].into_iter().enumerate() {
        for (j, (good, wolf)) in [("random", "heuristic"), ("heuristic", "random")].into_iter().enumerate() {
            let body = format!(
                "master_seed = {}\nmatchup = \"{n}p\"\n[game]\nn_players = {n}\nsheriff_enabled = {sheriff}\n[assignment]\ngood = \"{good}\"\nwolf = \"{wolf}\"\n",
                500 + 10 * i + j
            );
            logs.extend(play_in_memory(&body, 25));
        }
    }
    let games: Vec<ScoredGame> = logs
        .iter()
        .map(|l| ScoredGame::from_log(l, false))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut per_game_cells = 0;
    let mut pooled = BTreeMap::new();
    for (log, game) in logs.iter().zip(&games) {
        let report = build_report(std::slice::from_ref(game)).map_err(|e| e.to_string())?;
        let mut single = BTreeMap::new();
        oracle_game(&events(log), &log.header().game_config, &game.matchup, &mut single);
        per_game_cells += compare_report(&report, &oracle_rows(&single))?;
        oracle_game(&events(log), &log.header().game_config, &game.matchup, &mut pooled);
    }
    let report = build_report(&games).map_err(|e| e.to_string())?;
    let cells = compare_report(&report, &oracle_rows(&pooled))?;
    let sheriff_cells = report.rows.iter().filter(|r| r.sheriff_good.is_some() || r.sheriff_bad.is_some()).count();
    if sheriff_cells == 0 {
        return Err("no sheriff influence value was exercised".into());
    }
    Ok(format!(
        "{} games; {per_game_cells} per-game and {cells} aggregate cells match within {METRIC_TOL:e}, all in [0,1]",
        games.len()
    ))
}

// ---------------------------------------------------------------------------
// Reward law

fn reward_law() -> Outcome {
    if reward_for(true, 6) != 994.0 || reward_for(false, 6) != 6.0 {
        return Err(format!("spot values {}/{}", reward_for(true, 6), reward_for(false, 6)));
    }
    for t in 1..500 {
        if reward_for(true, t) <= reward_for(false, t) {
            return Err(format!("T={t}: winner {} <= loser {}", reward_for(true, t), reward_for(false, t)));
        }
    }
    let dir = tempfile::tempdir().unwrap();
    let body = "n_games = 20\nmaster_seed = 31\n[game]\nn_players = 12\n[assignment]\n\"*\" = \"random\"\n[pool]\nenabled = true\n";
    let a = arena(body, dir.path());
    a.run().map_err(|e| e.to_string())?;
    let entries = a.pool().unwrap().entries();
    let mut games = 0;
    for file in werewolf_arena::report::log_files(dir.path()).unwrap() {
        let log = GameLog::parse(&std::fs::read_to_string(&file).unwrap()).map_err(|e| e.to_string())?;
        let (winner, t) = log
            .events()
            .find_map(|e| match e {
                GameEvent::GameOver { winner, total_rounds } => Some((*winner, *total_rounds)),
                _ => None,
            })
            .ok_or("unfinished game")?;
        if t >= 500 {
            continue;
        }
        let roles: BTreeMap<Seat, Role> = log
            .events()
            .filter_map(|e| match e {
                GameEvent::RoleAssigned { seat, role, .. } => Some((*seat, *role)),
                _ => None,
            })
            .collect();
        let mine: Vec<&Experience> = entries.iter().filter(|e| e.tags.game_id == log.header().game_id).collect();
        let (win, lose): (Vec<f64>, Vec<f64>) = {
            let mut w = Vec::new();
            let mut l = Vec::new();
            for e in &mine {
                let r = e.reward.ok_or("unfinalized experience")?;
                if roles[&e.tags.seat].camp() == winner {
                    w.push(r);
                } else {
                    l.push(r);
                }
            }
            (w, l)
        };
        if win.iter().any(|r| *r != 1000.0 - f64::from(t)) || lose.iter().any(|r| *r != f64::from(t)) {
            return Err(format!("{}: rewards off the law for T={t}", log.header().game_id));
        }
        let min_w = win.iter().cloned().fold(f64::INFINITY, f64::min);
        let max_l = lose.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(min_w > max_l) {
            return Err(format!("{}: min winner {min_w} <= max loser {max_l}", log.header().game_id));
        }
        games += 1;
    }
    // A six-round synthetic game through the pool itself.
    let pool = ExperiencePool::new(Arc::new(HashEmbedder));
    for s in 0..4u8 {
        let tags = ExperienceTags {
            seat: Seat(s),
            role: Role::Villager,
            model_tag: "m".into(),
            game_id: "six".into(),
            round: 1,
        };
        pool.add_experience("seat one voted seat two", tags).map_err(|e| e.to_string())?;
    }
    let winners: BTreeSet<Seat> = [Seat(0), Seat(1)].into();
    let outcome = GameOutcomeRecord {
        game_id: "six".into(),
        winner: Camp::Good,
        total_rounds: 6,
    };
    pool.finalize_rewards(&outcome, &winners).map_err(|e| e.to_string())?;
    let spot: Vec<f64> = pool.entries().iter().map(|e| e.reward.unwrap()).collect();
    if spot != [994.0, 994.0, 6.0, 6.0] {
        return Err(format!("six-round pool rewards {spot:?}"));
    }
    if games == 0 {
        return Err("no finished games checked".into());
    }
    Ok(format!("{games} pooled games obey the law; T=6 gives 994/6"))
}

// ---------------------------------------------------------------------------
// Retrieval

const WORDS: [&str; 24] = [
    "seat", "wolf", "vote", "seer", "guard", "witch", "hunter", "exile", "claim", "lie", "trust", "night", "kill",
    "save", "one", "two", "three", "four", "five", "six", "suspicious", "quiet", "pushed", "defended",
];

fn sentence(rng: &mut SplitMix64) -> String {
    let n = 2 + rng.below(6);
    (0..n).map(|_| WORDS[rng.below(WORDS.len())]).collect::<Vec<_>>().join(" ")
}

fn oracle_cosine(u: &[f64], v: &[f64]) -> f64 {
    let dot: f64 = u.iter().zip(v).fold(0.0, |acc, (a, b)| acc + a * b);
    let nu: f64 = u.iter().fold(0.0, |acc, a| acc + a * a);
    let nv: f64 = v.iter().fold(0.0, |acc, b| acc + b * b);
    if nu == 0.0 || nv == 0.0 {
        0.0
    } else {
        dot / (nu.sqrt() * nv.sqrt())
    }
}

fn retrieval_correctness() -> Outcome {
    let mut rng = SplitMix64::new(4242);
    let roles = [Role::Werewolf, Role::Villager, Role::Seer];
    let mut queries_done = 0;
    let mut nonempty = 0;
    for (size, queries) in [(100usize, 500usize), (1_000, 300), (10_000, 200)] {
        let pool = ExperiencePool::new(Arc::new(HashEmbedder));
        for i in 0..size {
            let text = sentence(&mut rng);
            let reward = match rng.below(5) {
                0 => None,
                r => Some(if r % 2 == 0 { 1000.0 - r as f64 } else { r as f64 }),
            };
            let tags = ExperienceTags {
                seat: Seat(rng.below(12) as u8),
                role: roles[rng.below(3)],
                model_tag: ["a", "b"][rng.below(2)].into(),
                game_id: format!("g{}", i / 20),
                round: 1,
            };
            pool.insert(text.clone(), HashEmbedder::embed_text(&text), reward, tags).map_err(|e| e.to_string())?;
        }
        let entries = pool.entries();
        for q in 0..queries {
            let text = sentence(&mut rng);
            let cfg = RetrievalConfig {
                k: 1 + rng.below(5),
                threshold: 0.5,
                filter: TagFilter {
                    role: (rng.below(3) == 0).then(|| roles[rng.below(3)]),
                    model_tag: (rng.below(4) == 0).then(|| "a".to_string()),
                    seat: None,
                },
            };
            let got: Vec<u64> = pool
                .retrieve(&text, &cfg)
                .map_err(|e| e.to_string())?
                .iter()
                .map(|r| r.experience.id)
                .collect();
            let qv = HashEmbedder::embed_text(&text);
            let mut scan: Vec<(f64, f64, u64)> = entries
                .iter()
                .filter(|e| e.reward.is_some())
                .filter(|e| cfg.filter.role.is_none_or(|r| r == e.tags.role))
                .filter(|e| cfg.filter.model_tag.as_ref().is_none_or(|m| *m == e.tags.model_tag))
                .map(|e| (e.reward.unwrap(), oracle_cosine(&qv, &e.embedding), e.id))
                .filter(|(_, sim, _)| *sim >= 0.5)
                .collect();
            scan.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)).then(b.2.cmp(&a.2)));
            let want: Vec<u64> = scan.iter().take(cfg.k).map(|x| x.2).collect();
            if got != want {
                return Err(format!("pool {size}, query {q} ({text:?}): got {got:?}, scan {want:?}"));
            }
            nonempty += usize::from(!want.is_empty());
            queries_done += 1;
        }
    }
    if nonempty < queries_done / 4 {
        return Err(format!("only {nonempty}/{queries_done} queries returned anything"));
    }
    Ok(format!("{queries_done} queries on pools of 1e2..1e4, 0 mismatches ({nonempty} nonempty)"))
}

// ---------------------------------------------------------------------------
// Boards

fn board_compositions() -> Outcome {
    use Role::*;
    let expect8 = vec![Werewolf, Werewolf, Villager, Villager, Villager, Villager, Seer, Guard];
    let expect12 = vec![Werewolf, Werewolf, Werewolf, Werewolf, Villager, Villager, Villager, Villager, Seer, Witch, Hunter, Guard];
    let mut checked = 0;
    for (n, expect) in [(8, expect8), (12, expect12)] {
        for seed in 0..500u64 {
            let cfg = ExperimentConfig::from_toml(&format!("[game]\nn_players = {n}\nsheriff_enabled = {}\n", seed % 2 == 0))
                .map_err(|e| e.to_string())?;
            let state = new_game(cfg.game_config(seed)).map_err(|e| e.to_string())?;
            let mut roles: Vec<Role> = state.players().iter().map(|p| p.role).collect();
            roles.sort();
            let mut want = expect.clone();
            want.sort();
            if roles != want {
                return Err(format!("{n} players, seed {seed}: {roles:?}"));
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} boards have the standard composition"))
}

// ---------------------------------------------------------------------------
// End-to-end smoke

fn sheriff_sequence_rounds(log: &GameLog) -> usize {
    let ev: Vec<&GameEvent> = log.events().collect();
    let mut ok = 0;
    for (i, e) in ev.iter().enumerate() {
        if let GameEvent::SheriffSummary { .. } = e {
            let before = ev[..i].iter().rev().take_while(|e| !matches!(e, GameEvent::RoundStarted { .. }));
            let pseudo_before = before
                .clone()
                .any(|e| matches!(e, GameEvent::VoteCast { kind: VoteKind::Pseudo, .. }));
            let official_before = before.clone().any(|e| matches!(e, GameEvent::VoteCast { kind: VoteKind::Official, .. }));
            let official_after = ev[i..]
                .iter()
                .take_while(|e| !matches!(e, GameEvent::RoundStarted { .. }))
                .any(|e| matches!(e, GameEvent::VoteCast { kind: VoteKind::Official, .. }));
            if pseudo_before && !official_before && official_after {
                ok += 1;
            }
        }
    }
    ok
}

fn end_to_end_smoke() -> Outcome {
    let slots = "[models.alpha]\nkind = \"mock\"\n[models.beta]\nkind = \"mock\"\n[assignment]\ngood = \"alpha\"\nwolf = \"beta\"\n";
    let mut notes = Vec::new();
    for (n, sheriff) in [(8, true), (12, false)] {
        let dir = tempfile::tempdir().unwrap();
        let body = format!("n_games = 10\nmaster_seed = 8080\n[game]\nn_players = {n}\nsheriff_enabled = {sheriff}\n{slots}");
        let summary = arena(&body, dir.path()).run().map_err(|e| e.to_string())?;
        if summary.games.len() != 10 || summary.aborted() != 0 {
            return Err(format!("{n}p: {} games, {} aborted", summary.games.len(), summary.aborted()));
        }
        let loaded = load_logs(dir.path(), false).map_err(|e| e.to_string())?;
        if loaded.games.len() != 10 {
            return Err(format!("{n}p: {} usable logs", loaded.games.len()));
        }
        let report = build_report(&loaded.games).map_err(|e| e.to_string())?;
        let table = render_table(&report);
        let header = table.lines().next().unwrap_or_default();
        if let Some(missing) = MetricRow::COLUMNS.iter().find(|c| !header.contains(*c)) {
            return Err(format!("{n}p report lacks column {missing}"));
        }
        if report.rows.len() != 2 {
            return Err(format!("{n}p: {} rows", report.rows.len()));
        }
        if sheriff {
            let mut sequences = 0;
            for file in werewolf_arena::report::log_files(dir.path()).unwrap() {
                let log = GameLog::parse(&std::fs::read_to_string(file).unwrap()).unwrap();
                let s = sheriff_sequence_rounds(&log);
                if s == 0 && log.events().any(|e| matches!(e, GameEvent::SheriffElected { .. })) {
                    return Err("sheriff game without pseudo → summary → official sequence".into());
                }
                sequences += s;
            }
            let influence: Vec<f64> = report.rows.iter().flat_map(|r| [r.sheriff_good, r.sheriff_bad]).flatten().collect();
            if influence.is_empty() || influence.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(format!("sheriff influence {influence:?}"));
            }
            notes.push(format!("8p+sheriff: {sequences} pseudo→summary→official rounds, influence {influence:?}"));
        } else {
            notes.push(format!("{n}p: 10/10 finished"));
        }
    }
    Ok(notes.join("; "))
}

// ---------------------------------------------------------------------------
// Information hiding

/// Independent audience table.
fn may_see(e: &GameEvent, seat: Seat, role: Role) -> bool {
    match e {
        GameEvent::RoleAssigned { seat: s, .. } => *s == seat,
        GameEvent::NightAction {
            kind: NightActionKind::WolfProposal,
            ..
        }
        | GameEvent::WolfTarget { .. } => role == Role::Werewolf,
        GameEvent::NightAction { actor, .. } => *actor == seat,
        GameEvent::SeerResult { seer, .. } => *seer == seat,
        GameEvent::WitchInformed { witch, .. } => *witch == seat,
        GameEvent::IdentityInference { seat: s, .. } => *s == seat,
        GameEvent::Death {
            cause: DeathCause::WolfKill | DeathCause::Poison,
            ..
        } => false,
        _ => true,
    }
}

fn scan(ctx: &AgentContext, roles: &BTreeMap<Seat, Role>) -> Vec<String> {
    let mut leaks = Vec::new();
    if roles.get(&ctx.seat) != Some(&ctx.role) {
        leaks.push(format!("{} context carries role {}", ctx.seat, ctx.role));
    }
    for e in &ctx.events {
        if !may_see(e, ctx.seat, ctx.role) {
            leaks.push(format!("{} ({}) sees {e:?}", ctx.seat, ctx.role));
        }
    }
    let p = &ctx.private;
    if p.wolf_teammates.is_some() != (ctx.role == Role::Werewolf) {
        leaks.push(format!("{} ({}) wolf roster presence wrong", ctx.seat, ctx.role));
    }
    if !p.seer_results.is_empty() && ctx.role != Role::Seer {
        leaks.push(format!("{} ({}) holds seer results", ctx.seat, ctx.role));
    }
    if !p.witch_victims.is_empty() && ctx.role != Role::Witch {
        leaks.push(format!("{} ({}) holds the witch victim", ctx.seat, ctx.role));
    }
    if matches!(ctx.request.kind, RequestKind::WitchDecision { .. }) && ctx.role != Role::Witch {
        leaks.push(format!("{} ({}) got a witch request", ctx.seat, ctx.role));
    }
    if ctx.request.seat != ctx.seat {
        leaks.push(format!("{} answers a request for {}", ctx.seat, ctx.request.seat));
    }
    // Pool entries only come from finished games.
    if ctx.retrieved.iter().any(|r| r.experience.reward.is_none()) {
        leaks.push(format!("{} retrieved an unfinished game's experience", ctx.seat));
    }
    leaks
}

fn information_hiding() -> Outcome {
    let seen: Arc<Mutex<Vec<AgentContext>>> = Arc::new(Mutex::new(Vec::new()));
    let configs = [
        "[game]\nn_players = 12\n[assignment]\n\"*\" = \"mock\"\n[pool]\nenabled = true\n",
        "[game]\nn_players = 8\nsheriff_enabled = true\n[assignment]\ngood = \"random\"\nwolf = \"mock\"\n",
        "[game]\nn_players = 12\nsheriff_enabled = true\n[assignment]\n\"*\" = \"heuristic\"\n",
    ];
    let (mut contexts, mut games) = (0usize, 0usize);
    for (i, body) in configs.iter().enumerate() {
        let n_games = if i == 0 { 18 } else { 16 };
        let dir = tempfile::tempdir().unwrap();
        let sink = seen.clone();
        let a = arena(&format!("n_games = {n_games}\nmaster_seed = {}\n{body}", 60 + i), dir.path())
            .with_observer(Arc::new(move |ctx: &AgentContext| sink.lock().unwrap().push(ctx.clone())));
        for g in 0..n_games {
            let log = a.play(g as u64).log;
            let roles: BTreeMap<Seat, Role> = log
                .events()
                .filter_map(|e| match e {
                    GameEvent::RoleAssigned { seat, role, .. } => Some((*seat, *role)),
                    _ => None,
                })
                .collect();
            let batch = std::mem::take(&mut *seen.lock().unwrap());
            for ctx in &batch {
                let leaks = scan(ctx, &roles);
                if let Some(first) = leaks.first() {
                    return Err(format!("config {i} game {g}: {} leaks, first: {first}", leaks.len()));
                }
            }
            contexts += batch.len();
            games += 1;
        }
    }
    Ok(format!("{games} games, {contexts} contexts scanned, 0 leaks"))
}
