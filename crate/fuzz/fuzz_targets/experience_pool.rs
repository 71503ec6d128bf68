#![no_main]

use std::sync::Arc;

use libfuzzer_sys::fuzz_target;
use werewolf_core::memory::{ExperiencePool, HashEmbedder, RetrievalConfig};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let pool = ExperiencePool::new(Arc::new(HashEmbedder));
    if pool.import_jsonl(text).is_ok() {
        let _ = pool.retrieve("wolf vote seat", &RetrievalConfig::default());
        let copy = ExperiencePool::new(Arc::new(HashEmbedder));
        copy.import_jsonl(&pool.export_jsonl()).expect("export re-imports");
        assert_eq!(copy.len(), pool.len());
    }
});
