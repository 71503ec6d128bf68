#![no_main]

use std::collections::BTreeSet;

use libfuzzer_sys::fuzz_target;
use werewolf_core::agent::{parse_response, render_response};
use werewolf_core::game::{ActionRequest, GameState, RequestKind, Seat};

fn request(selector: u8) -> ActionRequest {
    let kind = match selector % 13 {
        0 => RequestKind::WolfProposal,
        1 => RequestKind::GuardTarget,
        2 => RequestKind::SeerTarget,
        3 => RequestKind::WitchDecision {
            victim: Seat(3),
            heal_available: selector & 16 != 0,
            poison_available: selector & 32 != 0,
            both_allowed: selector & 64 != 0,
        },
        4 => RequestKind::HunterShot,
        5 => RequestKind::ElectionBallot,
        6 => RequestKind::Speech { debate: false },
        7 => RequestKind::PseudoBallot,
        8 => RequestKind::Inference,
        9 => RequestKind::OfficialBallot,
        10 => RequestKind::TiebreakBallot,
        11 => RequestKind::SpeakingOrderChoice,
        _ => RequestKind::Speech { debate: true },
    };
    ActionRequest {
        seat: Seat(0),
        kind,
        legal_targets: (1..12).map(Seat).collect::<BTreeSet<_>>(),
    }
}

fuzz_target!(|data: &[u8]| {
    let Some((&selector, rest)) = data.split_first() else {
        return;
    };
    let Ok(raw) = std::str::from_utf8(rest) else {
        return;
    };
    let req = request(selector);
    // Anything accepted must be legal and survive a render/parse cycle.
    if let Ok(resp) = parse_response(raw, &req) {
        GameState::validate_response(&req, &resp).expect("parsed response is legal");
        let again = parse_response(&render_response(&resp), &req).expect("rendered response parses");
        assert_eq!(again, resp);
    }
});
