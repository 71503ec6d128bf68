//! Line-oriented answer grammar.
//!
//! Each decision is a `KEYWORD: value` line; keywords are case-insensitive,
//! surrounding prose is ignored and the first matching line wins.
//!
//! | request | lines |
//! |---|---|
//! | wolf proposal | `KILL: <seat>` |
//! | guard | `GUARD: <seat>` |
//! | seer | `CHECK: <seat>` |
//! | witch | `HEAL: YES\|NO`, `POISON: <seat>\|NONE` (either may be omitted) |
//! | hunter | `SHOOT: <seat>\|NONE` |
//! | any ballot | `VOTE: <seat>\|ABSTAIN` |
//! | speech | `SPEECH: <text>` (text runs to the end) |
//! | sheriff summary | `RECOMMEND: <seat>` then `SUMMARY: <text>` |
//! | inference | `INFERENCE: seat2=werewolf, seat4=good` or `INFERENCE: NONE` |
//! | speaking order | `ORDER: <seat> ASC\|DESC` |
//!
//! A seat may be written `3`, `seat 3`, `seat3` or `#3`. Without an
//! `INFERENCE:` line the whole reply is scanned for `seatN=camp` pairs.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::game::{ActionRequest, AgentResponse, Camp, Direction, RequestKind, RequestTag, Seat};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no `{0}:` line found")]
    MissingKeyword(&'static str),
    #[error("cannot read `{keyword}: {value}`")]
    Malformed { keyword: &'static str, value: String },
    #[error("seat {target} is not a legal choice (legal: {legal:?})")]
    IllegalTarget { target: u64, legal: Vec<u8> },
    #[error("the {0} potion is not available")]
    PotionUnavailable(&'static str),
    #[error("both potions may not be used in one night")]
    BothPotions,
    #[error("`{0}:` text is empty")]
    EmptyText(&'static str),
}

const KEYWORDS: [&str; 14] = [
    "KILL", "GUARD", "CHECK", "HEAL", "POISON", "SHOOT", "VOTE", "SPEECH", "RECOMMEND", "SUMMARY",
    "INFERENCE", "ORDER", "ABSTAIN", "NONE",
];

/// Keywords that may open a line of an answer; free text should not start
/// with one if it is to survive a round trip.
pub fn is_keyword_line(line: &str) -> bool {
    KEYWORDS[..12].iter().any(|k| keyword_value(line, k).is_some())
}

/// Value after `keyword:` when `line` (leading space and `*`/`-` markup
/// trimmed) starts with it.
fn keyword_value<'a>(line: &'a str, keyword: &str) -> Option<&'a str> {
    let l = line.trim_start().trim_start_matches(['*', '-', '>', ' ']);
    let head = l.get(..keyword.len())?;
    if !head.eq_ignore_ascii_case(keyword) {
        return None;
    }
    let rest = l[keyword.len()..].trim_start_matches('*').trim_start();
    rest.strip_prefix(':').map(|v| v.trim_start_matches('*'))
}

/// First line carrying `keyword`, with its index.
fn find<'a>(raw: &'a str, keyword: &'static str) -> Option<(usize, &'a str)> {
    raw.lines()
        .enumerate()
        .find_map(|(i, l)| keyword_value(l, keyword).map(|v| (i, v.trim())))
}

fn require<'a>(raw: &'a str, keyword: &'static str) -> Result<(usize, &'a str), ParseError> {
    find(raw, keyword).ok_or(ParseError::MissingKeyword(keyword))
}

enum SeatOr {
    Seat(u64),
    Word(String),
}

fn read_seat_token(value: &str) -> Option<SeatOr> {
    let v = value.trim().to_ascii_lowercase();
    let v = v.strip_prefix("seat").unwrap_or(&v).trim_start();
    let v = v.strip_prefix('#').unwrap_or(v);
    let digits: String = v.chars().take_while(|c| c.is_ascii_digit()).collect();
    if !digits.is_empty() {
        return digits.parse().ok().map(SeatOr::Seat);
    }
    let word: String = v.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    (!word.is_empty()).then_some(SeatOr::Word(word))
}

fn legal_seat(n: u64, req: &ActionRequest) -> Result<Seat, ParseError> {
    u8::try_from(n)
        .ok()
        .map(Seat)
        .filter(|s| req.legal_targets.contains(s))
        .ok_or_else(|| ParseError::IllegalTarget {
            target: n,
            legal: req.legal_targets.iter().map(|s| s.0).collect(),
        })
}

/// Required seat after `keyword`.
fn seat_line(raw: &str, keyword: &'static str, req: &ActionRequest) -> Result<Seat, ParseError> {
    let (_, value) = require(raw, keyword)?;
    match read_seat_token(value) {
        Some(SeatOr::Seat(n)) => legal_seat(n, req),
        _ => Err(ParseError::Malformed {
            keyword,
            value: value.to_string(),
        }),
    }
}

/// Seat or one of `empty_words` (→ `None`) after `keyword`.
fn optional_seat_line(
    raw: &str,
    keyword: &'static str,
    empty_words: &[&str],
    req: &ActionRequest,
) -> Result<Option<Seat>, ParseError> {
    let (_, value) = require(raw, keyword)?;
    match read_seat_token(value) {
        Some(SeatOr::Seat(n)) => legal_seat(n, req).map(Some),
        Some(SeatOr::Word(w)) if empty_words.contains(&w.as_str()) => Ok(None),
        _ => Err(ParseError::Malformed {
            keyword,
            value: value.to_string(),
        }),
    }
}

/// Text from `keyword:` to the end of the reply, or up to the first line
/// carrying `stop`.
fn text_from(raw: &str, keyword: &'static str, stop: Option<&'static str>) -> Result<String, ParseError> {
    let (start, first) = require(raw, keyword)?;
    let mut parts = vec![first.to_string()];
    for line in raw.lines().skip(start + 1) {
        if stop.is_some_and(|k| keyword_value(line, k).is_some()) {
            break;
        }
        parts.push(line.to_string());
    }
    let text = parts.join("\n").trim().to_string();
    if text.is_empty() {
        return Err(ParseError::EmptyText(keyword));
    }
    Ok(text)
}

fn camp_word(w: &str) -> Option<Camp> {
    match w {
        "werewolf" | "werewolves" | "wolf" | "wolves" | "bad" => Some(Camp::Wolf),
        "good" | "villager" | "village" | "town" => Some(Camp::Good),
        _ => None,
    }
}

/// All `seatN=camp` (or `seat N: camp`) pairs in `text`, first claim per
/// seat kept.
fn scan_claims(text: &str) -> Result<BTreeMap<u64, Camp>, ParseError> {
    let lower = text.to_ascii_lowercase();
    let b = lower.as_bytes();
    let mut out = BTreeMap::new();
    let mut i = 0;
    while let Some(pos) = lower[i..].find("seat") {
        let mut j = i + pos + 4;
        i = j;
        while j < b.len() && b[j] == b' ' {
            j += 1;
        }
        let d0 = j;
        while j < b.len() && b[j].is_ascii_digit() {
            j += 1;
        }
        if j == d0 {
            continue;
        }
        let Ok(n) = lower[d0..j].parse::<u64>() else {
            return Err(ParseError::Malformed {
                keyword: "INFERENCE",
                value: lower[d0..j].to_string(),
            });
        };
        while j < b.len() && b[j] == b' ' {
            j += 1;
        }
        if j >= b.len() || (b[j] != b'=' && b[j] != b':') {
            continue;
        }
        j += 1;
        while j < b.len() && b[j] == b' ' {
            j += 1;
        }
        let w0 = j;
        while j < b.len() && b[j].is_ascii_alphabetic() {
            j += 1;
        }
        if let Some(camp) = camp_word(&lower[w0..j]) {
            out.entry(n).or_insert(camp);
        }
        i = j;
    }
    Ok(out)
}

fn yes_no(value: &str, keyword: &'static str) -> Result<bool, ParseError> {
    match read_seat_token(value) {
        Some(SeatOr::Word(w)) if w == "yes" || w == "y" || w == "true" => Ok(true),
        Some(SeatOr::Word(w)) if w == "no" || w == "n" || w == "false" => Ok(false),
        _ => Err(ParseError::Malformed {
            keyword,
            value: value.to_string(),
        }),
    }
}

/// Reads `raw` as the answer to `req`, enforcing legality.
pub fn parse_response(raw: &str, req: &ActionRequest) -> Result<AgentResponse, ParseError> {
    let ballot = |tag| -> Result<AgentResponse, ParseError> {
        let target = optional_seat_line(raw, "VOTE", &["abstain", "none", "no"], req)?;
        Ok(AgentResponse::ballot_for(tag, target).expect("ballot tag"))
    };
    Ok(match &req.kind {
        RequestKind::WolfProposal => AgentResponse::WolfProposal {
            target: seat_line(raw, "KILL", req)?,
        },
        RequestKind::GuardTarget => AgentResponse::GuardTarget {
            target: seat_line(raw, "GUARD", req)?,
        },
        RequestKind::SeerTarget => AgentResponse::SeerTarget {
            target: seat_line(raw, "CHECK", req)?,
        },
        RequestKind::WitchDecision {
            heal_available,
            poison_available,
            both_allowed,
            ..
        } => {
            let heal_line = find(raw, "HEAL");
            let poison_line = find(raw, "POISON");
            if heal_line.is_none() && poison_line.is_none() {
                return Err(ParseError::MissingKeyword("HEAL"));
            }
            let heal = match heal_line {
                Some((_, v)) => yes_no(v, "HEAL")?,
                None => false,
            };
            let poison = match poison_line {
                Some(_) => optional_seat_line(raw, "POISON", &["none", "no"], req)?,
                None => None,
            };
            if heal && !heal_available {
                return Err(ParseError::PotionUnavailable("heal"));
            }
            if poison.is_some() && !poison_available {
                return Err(ParseError::PotionUnavailable("poison"));
            }
            if heal && poison.is_some() && !both_allowed {
                return Err(ParseError::BothPotions);
            }
            AgentResponse::WitchDecision { heal, poison }
        }
        RequestKind::HunterShot => AgentResponse::HunterShot {
            target: optional_seat_line(raw, "SHOOT", &["none", "no", "pass", "decline"], req)?,
        },
        RequestKind::Speech { .. } => AgentResponse::Speech {
            text: text_from(raw, "SPEECH", None)?,
        },
        RequestKind::SheriffSummary { .. } => {
            let recommended = seat_line(raw, "RECOMMEND", req)?;
            let text = match find(raw, "SUMMARY") {
                Some(_) => text_from(raw, "SUMMARY", Some("RECOMMEND"))?,
                None => String::new(),
            };
            AgentResponse::SheriffSummary { recommended, text }
        }
        RequestKind::Inference => {
            let claims = match find(raw, "INFERENCE") {
                Some((_, v)) if matches!(read_seat_token(v), Some(SeatOr::Word(w)) if w == "none") => {
                    BTreeMap::new()
                }
                Some((_, v)) => {
                    let c = scan_claims(v)?;
                    if c.is_empty() {
                        return Err(ParseError::Malformed {
                            keyword: "INFERENCE",
                            value: v.to_string(),
                        });
                    }
                    c
                }
                None => {
                    let c = scan_claims(raw)?;
                    if c.is_empty() {
                        return Err(ParseError::MissingKeyword("INFERENCE"));
                    }
                    c
                }
            };
            let claims = claims
                .into_iter()
                .map(|(n, camp)| legal_seat(n, req).map(|s| (s, camp)))
                .collect::<Result<_, _>>()?;
            AgentResponse::Inference { claims }
        }
        RequestKind::SpeakingOrderChoice => {
            let (_, value) = require(raw, "ORDER")?;
            let malformed = || ParseError::Malformed {
                keyword: "ORDER",
                value: value.to_string(),
            };
            let Some(SeatOr::Seat(n)) = read_seat_token(value) else {
                return Err(malformed());
            };
            let start = legal_seat(n, req)?;
            let lower = value.to_ascii_lowercase();
            let dir_word = lower
                .split(|c: char| !c.is_ascii_alphabetic())
                .rfind(|w| !w.is_empty() && *w != "seat");
            let direction = match dir_word {
                Some("asc" | "ascending" | "up" | "clockwise") | None => Direction::Ascending,
                Some("desc" | "descending" | "down" | "counterclockwise" | "anticlockwise") => Direction::Descending,
                Some(_) => return Err(malformed()),
            };
            AgentResponse::SpeakingOrderChoice { start, direction }
        }
        RequestKind::ElectionBallot => ballot(RequestTag::ElectionBallot)?,
        RequestKind::PseudoBallot => ballot(RequestTag::PseudoBallot)?,
        RequestKind::OfficialBallot => ballot(RequestTag::OfficialBallot)?,
        RequestKind::TiebreakBallot => ballot(RequestTag::TiebreakBallot)?,
    })
}

/// Canonical text for a response; `parse_response` inverts it.
pub fn render_response(resp: &AgentResponse) -> String {
    let opt = |t: &Option<Seat>, none: &str| t.map_or(none.to_string(), |s| s.0.to_string());
    match resp {
        AgentResponse::WolfProposal { target } => format!("KILL: {}", target.0),
        AgentResponse::GuardTarget { target } => format!("GUARD: {}", target.0),
        AgentResponse::SeerTarget { target } => format!("CHECK: {}", target.0),
        AgentResponse::WitchDecision { heal, poison } => format!(
            "HEAL: {}\nPOISON: {}",
            if *heal { "YES" } else { "NO" },
            opt(poison, "NONE")
        ),
        AgentResponse::HunterShot { target } => format!("SHOOT: {}", opt(target, "NONE")),
        AgentResponse::ElectionBallot { target }
        | AgentResponse::PseudoBallot { target }
        | AgentResponse::OfficialBallot { target }
        | AgentResponse::TiebreakBallot { target } => format!("VOTE: {}", opt(target, "ABSTAIN")),
        AgentResponse::Speech { text } => format!("SPEECH: {text}"),
        AgentResponse::SheriffSummary { recommended, text } => {
            if text.is_empty() {
                format!("RECOMMEND: {}", recommended.0)
            } else {
                format!("RECOMMEND: {}\nSUMMARY: {text}", recommended.0)
            }
        }
        AgentResponse::Inference { claims } => {
            if claims.is_empty() {
                "INFERENCE: NONE".to_string()
            } else {
                let parts: Vec<String> = claims
                    .iter()
                    .map(|(s, c)| {
                        format!(
                            "seat{}={}",
                            s.0,
                            match c {
                                Camp::Wolf => "werewolf",
                                Camp::Good => "good",
                            }
                        )
                    })
                    .collect();
                format!("INFERENCE: {}", parts.join(", "))
            }
        }
        AgentResponse::SpeakingOrderChoice { start, direction } => format!(
            "ORDER: {} {}",
            start.0,
            match direction {
                Direction::Ascending => "ASC",
                Direction::Descending => "DESC",
            }
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn req(kind: RequestKind, legal: &[u8]) -> ActionRequest {
        ActionRequest {
            seat: Seat(0),
            kind,
            legal_targets: legal.iter().copied().map(Seat).collect(),
        }
    }

    #[test]
    fn vote_lines() {
        let r = req(RequestKind::OfficialBallot, &[1, 3, 5]);
        assert_eq!(
            parse_response("I think...\nvote: seat 3\nVOTE: 5", &r),
            Ok(AgentResponse::OfficialBallot { target: Some(Seat(3)) })
        );
        assert_eq!(
            parse_response("VOTE: ABSTAIN", &r),
            Ok(AgentResponse::OfficialBallot { target: None })
        );
        assert_eq!(
            parse_response("VOTE: 9", &r),
            Err(ParseError::IllegalTarget {
                target: 9,
                legal: vec![1, 3, 5]
            })
        );
        assert_eq!(parse_response("I vote 3", &r), Err(ParseError::MissingKeyword("VOTE")));
        assert!(matches!(parse_response("VOTE: maybe", &r), Err(ParseError::Malformed { .. })));
        assert!(matches!(parse_response("VOTE: 99999999999999999999999", &r), Err(ParseError::Malformed { .. })));
    }

    #[test]
    fn inference_claims() {
        let r = req(RequestKind::Inference, &[1, 2, 3, 4]);
        let expect: BTreeMap<Seat, Camp> = [(Seat(2), Camp::Wolf), (Seat(4), Camp::Good)].into_iter().collect();
        assert_eq!(
            parse_response("My read: seat2=werewolf, seat4=good", &r),
            Ok(AgentResponse::Inference { claims: expect.clone() })
        );
        assert_eq!(
            parse_response("INFERENCE: Seat 2: Wolf; seat 4 = villager", &r),
            Ok(AgentResponse::Inference { claims: expect })
        );
        assert!(matches!(parse_response("INFERENCE: seat7=good", &r), Err(ParseError::IllegalTarget { .. })));
    }

    #[test]
    fn witch_rules() {
        let kind = |heal, poison| RequestKind::WitchDecision {
            victim: Seat(3),
            heal_available: heal,
            poison_available: poison,
            both_allowed: false,
        };
        let r = req(kind(true, true), &[1, 2, 3]);
        assert_eq!(
            parse_response("HEAL: yes", &r),
            Ok(AgentResponse::WitchDecision { heal: true, poison: None })
        );
        assert_eq!(parse_response("HEAL: YES\nPOISON: 2", &r), Err(ParseError::BothPotions));
        let r = req(kind(false, true), &[1, 2, 3]);
        assert_eq!(parse_response("HEAL: YES", &r), Err(ParseError::PotionUnavailable("heal")));
    }

    #[test]
    fn speech_and_summary_text() {
        let r = req(RequestKind::Speech { debate: false }, &[]);
        assert_eq!(
            parse_response("SPEECH: I am the seer.\nSeat 4 is a wolf.", &r),
            Ok(AgentResponse::Speech {
                text: "I am the seer.\nSeat 4 is a wolf.".into()
            })
        );
        assert_eq!(parse_response("SPEECH:   ", &r), Err(ParseError::EmptyText("SPEECH")));
    }

    #[test]
    fn order_choice() {
        let r = req(RequestKind::SpeakingOrderChoice, &[1, 2, 3]);
        assert_eq!(
            parse_response("ORDER: seat 2 descending", &r),
            Ok(AgentResponse::SpeakingOrderChoice {
                start: Seat(2),
                direction: Direction::Descending
            })
        );
    }

    pub(crate) fn legal_for(resp: &AgentResponse) -> (RequestKind, BTreeSet<Seat>) {
        let all: BTreeSet<Seat> = (0..12).map(Seat).collect();
        let kind = match resp {
            AgentResponse::WolfProposal { .. } => RequestKind::WolfProposal,
            AgentResponse::GuardTarget { .. } => RequestKind::GuardTarget,
            AgentResponse::SeerTarget { .. } => RequestKind::SeerTarget,
            AgentResponse::WitchDecision { .. } => RequestKind::WitchDecision {
                victim: Seat(0),
                heal_available: true,
                poison_available: true,
                both_allowed: true,
            },
            AgentResponse::HunterShot { .. } => RequestKind::HunterShot,
            AgentResponse::ElectionBallot { .. } => RequestKind::ElectionBallot,
            AgentResponse::Speech { .. } => RequestKind::Speech { debate: false },
            AgentResponse::PseudoBallot { .. } => RequestKind::PseudoBallot,
            AgentResponse::SheriffSummary { .. } => RequestKind::SheriffSummary {
                tally: crate::game::TallyResult {
                    totals: BTreeMap::new(),
                    outcome: crate::game::TallyOutcome::NoExile,
                },
            },
            AgentResponse::Inference { .. } => RequestKind::Inference,
            AgentResponse::OfficialBallot { .. } => RequestKind::OfficialBallot,
            AgentResponse::TiebreakBallot { .. } => RequestKind::TiebreakBallot,
            AgentResponse::SpeakingOrderChoice { .. } => RequestKind::SpeakingOrderChoice,
        };
        (kind, all)
    }

    mod round_trip {
        use super::*;
        use proptest::prelude::*;

        fn seat() -> impl Strategy<Value = Seat> + Clone {
            (0u8..12).prop_map(Seat)
        }

        fn opt() -> impl Strategy<Value = Option<Seat>> {
            proptest::option::of(seat())
        }

        fn text() -> impl Strategy<Value = String> {
            "[A-Za-z0-9 ,.!?']{0,40}(\n[A-Za-z0-9 ,.!?']{1,40}){0,2}"
                .prop_map(|s| s.trim().to_string())
                .prop_filter("nonempty, no keyword lines", |s| {
                    !s.is_empty() && !s.lines().any(is_keyword_line) && s.lines().all(|l| !l.is_empty() && l == l.trim())
                })
        }

        fn camp() -> impl Strategy<Value = Camp> {
            prop_oneof![Just(Camp::Wolf), Just(Camp::Good)]
        }

        fn response() -> impl Strategy<Value = AgentResponse> {
            prop_oneof![
                seat().prop_map(|target| AgentResponse::WolfProposal { target }),
                seat().prop_map(|target| AgentResponse::GuardTarget { target }),
                seat().prop_map(|target| AgentResponse::SeerTarget { target }),
                (any::<bool>(), opt()).prop_map(|(heal, poison)| AgentResponse::WitchDecision { heal, poison }),
                opt().prop_map(|target| AgentResponse::HunterShot { target }),
                opt().prop_map(|target| AgentResponse::ElectionBallot { target }),
                opt().prop_map(|target| AgentResponse::PseudoBallot { target }),
                opt().prop_map(|target| AgentResponse::OfficialBallot { target }),
                opt().prop_map(|target| AgentResponse::TiebreakBallot { target }),
                text().prop_map(|text| AgentResponse::Speech { text }),
                (seat(), prop_oneof![Just(String::new()), text()])
                    .prop_map(|(recommended, text)| AgentResponse::SheriffSummary { recommended, text }),
                proptest::collection::btree_map(seat(), camp(), 0..6).prop_map(|claims| AgentResponse::Inference { claims }),
                (seat(), any::<bool>()).prop_map(|(start, d)| AgentResponse::SpeakingOrderChoice {
                    start,
                    direction: if d { Direction::Ascending } else { Direction::Descending }
                }),
            ]
        }

        proptest! {
            #[test]
            fn parse_inverts_render(resp in response()) {
                let (kind, legal) = legal_for(&resp);
                let r = ActionRequest { seat: Seat(0), kind, legal_targets: legal };
                prop_assert_eq!(parse_response(&render_response(&resp), &r), Ok(resp));
            }

            #[test]
            fn parser_never_panics(raw in "\\PC{0,200}", k in 0usize..13) {
                let all = [
                    RequestKind::WolfProposal, RequestKind::GuardTarget, RequestKind::SeerTarget,
                    RequestKind::HunterShot, RequestKind::ElectionBallot, RequestKind::PseudoBallot,
                    RequestKind::Inference, RequestKind::OfficialBallot, RequestKind::TiebreakBallot,
                    RequestKind::SpeakingOrderChoice, RequestKind::Speech { debate: true },
                    RequestKind::WitchDecision { victim: Seat(1), heal_available: true, poison_available: false, both_allowed: false },
                    RequestKind::Inference,
                ];
                let r = ActionRequest { seat: Seat(0), kind: all[k].clone(), legal_targets: (0..8).map(Seat).collect() };
                if let Ok(resp) = parse_response(&raw, &r) {
                    prop_assert_eq!(resp.tag(), r.tag());
                }
            }
        }
    }
}
