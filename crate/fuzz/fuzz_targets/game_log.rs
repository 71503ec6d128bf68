#![no_main]

use libfuzzer_sys::fuzz_target;
use werewolf_core::log::GameLog;
use werewolf_core::metrics::GameLogView;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(log) = GameLog::parse(text) else {
        return;
    };
    let again = GameLog::parse(&log.to_jsonl()).expect("serialized log parses");
    assert_eq!(again, log);
    let _ = GameLogView::from_events(log.events());
});
