use std::fmt;
use std::path::Path;

use werewolf_core::game::{new_game, GameEvent, Seat};
use werewolf_core::log::{digest_json, GameLog};

/// Result of feeding a log's recorded inputs through a fresh engine.
#[derive(Debug, Clone, PartialEq)]
pub enum ReplayVerdict {
    /// Every logged event was regenerated. `partial` marks an aborted log
    /// whose recorded prefix matched.
    Pass { events: usize, partial: bool },
    /// First event index where the regenerated stream disagrees.
    Diverged {
        index: usize,
        expected: Option<Box<GameEvent>>,
        got: Option<Box<GameEvent>>,
        reason: String,
    },
    /// The log stops while the game is still running.
    PrematureEnd { index: usize, reason: String },
    /// The header cannot start a game.
    BadHeader(String),
}

impl ReplayVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ReplayVerdict::Pass { .. })
    }
}

impl fmt::Display for ReplayVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReplayVerdict::Pass { events, partial } => {
                write!(f, "PASS ({events} events{})", if *partial { ", aborted prefix" } else { "" })
            }
            ReplayVerdict::Diverged {
                index,
                expected,
                got,
                reason,
            } => {
                let show = |e: &Option<Box<GameEvent>>| {
                    e.as_ref()
                        .map_or_else(|| "nothing".to_string(), |e| serde_json::to_string(e).unwrap_or_default())
                };
                write!(
                    f,
                    "FAIL at event {index}: {reason}; logged {}, replay produced {}",
                    show(expected),
                    show(got)
                )
            }
            ReplayVerdict::PrematureEnd { index, reason } => write!(f, "FAIL premature end at event {index}: {reason}"),
            ReplayVerdict::BadHeader(m) => write!(f, "FAIL bad header: {m}"),
        }
    }
}

/// Replays one parsed log.
pub fn replay(log: &GameLog) -> ReplayVerdict {
    let header = log.header();
    if digest_json(&header.game_config) != header.game_config_digest {
        return ReplayVerdict::BadHeader("game_config_digest mismatch".into());
    }
    let mut state = match new_game(header.game_config.clone()) {
        Ok(s) => s,
        Err(e) => return ReplayVerdict::BadHeader(e.to_string()),
    };
    let logged: Vec<&GameEvent> = log.events().collect();
    let inputs: Vec<_> = log.inputs().collect();
    let aborted = log.aborted().is_some();
    let mut used = 0usize;
    let mut produced = state.events().to_vec();
    let mut checked = 0usize;

    loop {
        // Compare everything regenerated so far.
        while checked < produced.len() {
            match logged.get(checked) {
                Some(e) if **e == produced[checked] => checked += 1,
                Some(e) => {
                    return ReplayVerdict::Diverged {
                        index: checked,
                        expected: Some(Box::new((*e).clone())),
                        got: Some(Box::new(produced[checked].clone())),
                        reason: "event differs".into(),
                    }
                }
                None if aborted => {
                    return ReplayVerdict::Diverged {
                        index: checked,
                        expected: None,
                        got: Some(Box::new(produced[checked].clone())),
                        reason: "replay continues past the aborted log".into(),
                    }
                }
                None => {
                    return ReplayVerdict::PrematureEnd {
                        index: checked,
                        reason: format!("log has {} events but the game continues", logged.len()),
                    }
                }
            }
        }
        if state.is_over() {
            break;
        }
        if aborted && checked == logged.len() && used == inputs.len() {
            return ReplayVerdict::Pass {
                events: checked,
                partial: true,
            };
        }
        let pending = state.pending_requests();
        let step = if pending.is_empty() {
            state.advance()
        } else {
            let Some(batch) = inputs.get(used..used + pending.len()) else {
                if aborted && checked == logged.len() {
                    return ReplayVerdict::Pass {
                        events: checked,
                        partial: true,
                    };
                }
                return ReplayVerdict::PrematureEnd {
                    index: checked,
                    reason: format!(
                        "{} inputs remain but {} are pending",
                        inputs.len() - used,
                        pending.len()
                    ),
                };
            };
            let want: Vec<Seat> = pending.iter().map(|r| r.seat).collect();
            let have: Vec<Seat> = batch.iter().map(|i| i.seat).collect();
            if want != have {
                return ReplayVerdict::Diverged {
                    index: checked,
                    expected: logged.get(checked).map(|e| Box::new((*e).clone())),
                    got: None,
                    reason: format!("inputs answer seats {have:?}, engine awaits {want:?}"),
                };
            }
            used += batch.len();
            state.submit(batch.iter().map(|i| (i.seat, i.response.clone())))
        };
        match step {
            Ok(events) => produced.extend(events),
            Err(e) => {
                return ReplayVerdict::Diverged {
                    index: checked,
                    expected: logged.get(checked).map(|e| Box::new((*e).clone())),
                    got: None,
                    reason: format!("engine rejected recorded input: {e}"),
                }
            }
        }
    }
    if checked < logged.len() {
        return ReplayVerdict::Diverged {
            index: checked,
            expected: Some(Box::new(logged[checked].clone())),
            got: None,
            reason: "logged events after game over".into(),
        };
    }
    if used < inputs.len() {
        return ReplayVerdict::Diverged {
            index: checked,
            expected: None,
            got: None,
            reason: format!("{} unused inputs after game over", inputs.len() - used),
        };
    }
    ReplayVerdict::Pass {
        events: checked,
        partial: false,
    }
}

/// Parses and replays a log file. Parse errors carry line numbers.
pub fn replay_file(path: &Path) -> anyhow::Result<ReplayVerdict> {
    let text = std::fs::read_to_string(path)?;
    let log = GameLog::parse(&text)?;
    Ok(replay(&log))
}
