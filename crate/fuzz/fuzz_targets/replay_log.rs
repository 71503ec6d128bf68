#![no_main]

use libfuzzer_sys::fuzz_target;
use werewolf_arena::replay;
use werewolf_core::log::GameLog;

// Bounded so a single input cannot describe an enormous game.
const MAX_INPUT: usize = 256 * 1024;

fuzz_target!(|data: &[u8]| {
    if data.len() > MAX_INPUT {
        return;
    }
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(log) = GameLog::parse(text) {
        let _ = replay(&log).to_string();
    }
});
