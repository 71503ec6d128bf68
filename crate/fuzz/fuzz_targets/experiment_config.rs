#![no_main]

use libfuzzer_sys::fuzz_target;
use werewolf_arena::ExperimentConfig;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(cfg) = ExperimentConfig::from_toml(text) {
        // A validated config always yields a startable game.
        let game = cfg.game_config(0);
        game.validate().expect("validated config");
        let _ = cfg.matchup_label();
        let _ = cfg.digest();
    }
});
