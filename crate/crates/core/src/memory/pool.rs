use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use super::embed::{cosine, Embedder};
use super::MemoryError;
use crate::game::{Camp, Role, Seat};

pub const POOL_SCHEMA_VERSION: u32 = 1;

/// Reward constant from which the winner's round count is subtracted.
pub const REWARD_BASE: f64 = 1000.0;

/// Winners get `1000 − total_rounds`, losers get `total_rounds`.
pub fn reward_for(won: bool, total_rounds: u32) -> f64 {
    if won {
        REWARD_BASE - f64::from(total_rounds)
    } else {
        f64::from(total_rounds)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperienceTags {
    pub seat: Seat,
    pub role: Role,
    pub model_tag: String,
    pub game_id: String,
    pub round: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experience {
    /// Insertion order; larger is more recent.
    pub id: u64,
    pub summary: String,
    pub embedding: Vec<f64>,
    /// `None` until the experience's game is finalized.
    pub reward: Option<f64>,
    pub tags: ExperienceTags,
}

/// Restricts retrieval to experiences whose tags match every set field.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TagFilter {
    #[serde(default)]
    pub seat: Option<Seat>,
    #[serde(default)]
    pub role: Option<Role>,
    #[serde(default)]
    pub model_tag: Option<String>,
}

impl TagFilter {
    pub fn matches(&self, tags: &ExperienceTags) -> bool {
        self.seat.is_none_or(|s| s == tags.seat)
            && self.role.is_none_or(|r| r == tags.role)
            && self.model_tag.as_ref().is_none_or(|m| *m == tags.model_tag)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalConfig {
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub filter: TagFilter,
}

fn default_k() -> usize {
    3
}

fn default_threshold() -> f64 {
    0.5
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            k: default_k(),
            threshold: default_threshold(),
            filter: TagFilter::default(),
        }
    }
}

impl RetrievalConfig {
    pub fn validate(&self) -> Result<(), MemoryError> {
        if self.k == 0 {
            return Err(MemoryError::InvalidConfig("k must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return Err(MemoryError::InvalidConfig(format!(
                "threshold {} outside [0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameOutcomeRecord {
    pub game_id: String,
    pub winner: Camp,
    pub total_rounds: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Retrieved {
    pub experience: Experience,
    pub similarity: f64,
}

/// Retrieval order: reward desc, similarity desc, recency (id) desc.
pub fn retrieval_order(a: &Retrieved, b: &Retrieved) -> Ordering {
    let ra = a.experience.reward.unwrap_or(f64::NEG_INFINITY);
    let rb = b.experience.reward.unwrap_or(f64::NEG_INFINITY);
    rb.total_cmp(&ra)
        .then(b.similarity.total_cmp(&a.similarity))
        .then(b.experience.id.cmp(&a.experience.id))
}

#[derive(Debug, Default)]
struct PoolInner {
    entries: Vec<Experience>,
    finalized: BTreeSet<String>,
    next_id: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case", deny_unknown_fields)]
enum PoolLine {
    PoolHeader { schema_version: u32, embedder: String },
    Experience(Experience),
}

/// Cross-game experience store. Reads run concurrently; writes serialize.
pub struct ExperiencePool {
    embedder: Arc<dyn Embedder>,
    inner: RwLock<PoolInner>,
}

impl std::fmt::Debug for ExperiencePool {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExperiencePool")
            .field("embedder", &self.embedder.id())
            .field("len", &self.len())
            .finish()
    }
}

impl ExperiencePool {
    pub fn new(embedder: Arc<dyn Embedder>) -> Self {
        Self {
            embedder,
            inner: RwLock::new(PoolInner::default()),
        }
    }

    pub fn embedder(&self) -> &Arc<dyn Embedder> {
        &self.embedder
    }

    pub fn len(&self) -> usize {
        self.inner.read().unwrap().entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snapshot of all entries in insertion order.
    pub fn entries(&self) -> Vec<Experience> {
        self.inner.read().unwrap().entries.clone()
    }

    /// Stores a summary with its embedding; the reward stays pending.
    pub fn add_experience(&self, summary: &str, tags: ExperienceTags) -> Result<u64, MemoryError> {
        if summary.trim().is_empty() {
            return Err(MemoryError::EmptySummary);
        }
        let embedding = self.embedder.embed(summary)?;
        self.insert(summary.to_string(), embedding, None, tags)
    }

    /// Stores a precomputed embedding; used by import and tests.
    pub fn insert(
        &self,
        summary: String,
        embedding: Vec<f64>,
        reward: Option<f64>,
        tags: ExperienceTags,
    ) -> Result<u64, MemoryError> {
        let mut inner = self.inner.write().unwrap();
        if inner.finalized.contains(&tags.game_id) && reward.is_none() {
            return Err(MemoryError::AlreadyFinalized(tags.game_id));
        }
        let id = inner.next_id;
        inner.next_id += 1;
        inner.entries.push(Experience {
            id,
            summary,
            embedding,
            reward,
            tags,
        });
        Ok(id)
    }

    /// Assigns rewards to every experience of the game: winners' seats get
    /// `1000 − total_rounds`, the rest `total_rounds`.
    pub fn finalize_rewards(&self, outcome: &GameOutcomeRecord, winners: &BTreeSet<Seat>) -> Result<usize, MemoryError> {
        let mut inner = self.inner.write().unwrap();
        if inner.finalized.contains(&outcome.game_id) {
            return Err(MemoryError::AlreadyFinalized(outcome.game_id.clone()));
        }
        let mut n = 0;
        for e in inner.entries.iter_mut().filter(|e| e.tags.game_id == outcome.game_id) {
            e.reward = Some(reward_for(winners.contains(&e.tags.seat), outcome.total_rounds));
            n += 1;
        }
        if n == 0 {
            return Err(MemoryError::UnknownGame(outcome.game_id.clone()));
        }
        inner.finalized.insert(outcome.game_id.clone());
        Ok(n)
    }

    pub fn retrieve(&self, query: &str, config: &RetrievalConfig) -> Result<Vec<Retrieved>, MemoryError> {
        let q = self.embedder.embed(query)?;
        self.retrieve_embedding(&q, config)
    }

    /// Finalized, filter-passing entries with similarity ≥ threshold, best
    /// `k` under [`retrieval_order`].
    pub fn retrieve_embedding(&self, query: &[f64], config: &RetrievalConfig) -> Result<Vec<Retrieved>, MemoryError> {
        config.validate()?;
        let inner = self.inner.read().unwrap();
        let mut hits = Vec::new();
        for e in &inner.entries {
            if e.reward.is_none() || !config.filter.matches(&e.tags) {
                continue;
            }
            let similarity = cosine(query, &e.embedding)?;
            if similarity >= config.threshold {
                hits.push(Retrieved {
                    experience: e.clone(),
                    similarity,
                });
            }
        }
        hits.sort_by(retrieval_order);
        hits.truncate(config.k);
        Ok(hits)
    }

    /// JSONL: a header line, then one experience per line.
    pub fn export_jsonl(&self) -> String {
        let inner = self.inner.read().unwrap();
        let mut out = serde_json::to_string(&PoolLine::PoolHeader {
            schema_version: POOL_SCHEMA_VERSION,
            embedder: self.embedder.id(),
        })
        .expect("header serializes");
        out.push('\n');
        for e in &inner.entries {
            out.push_str(&serde_json::to_string(&PoolLine::Experience(e.clone())).expect("entry serializes"));
            out.push('\n');
        }
        out
    }

    /// Appends entries from an export. Ids are reassigned in file order so
    /// recency stays meaningful; games whose entries all carry rewards are
    /// marked finalized. Nothing is added if any line fails.
    pub fn import_jsonl(&self, text: &str) -> Result<usize, MemoryError> {
        let parsed = parse_pool(text, &self.embedder.id())?;
        let mut inner = self.inner.write().unwrap();
        let mut pending_games: BTreeMap<String, bool> = BTreeMap::new();
        let n = parsed.len();
        for mut e in parsed {
            let entry = pending_games.entry(e.tags.game_id.clone()).or_insert(true);
            *entry &= e.reward.is_some();
            e.id = inner.next_id;
            inner.next_id += 1;
            inner.entries.push(e);
        }
        for (game, complete) in pending_games {
            if complete {
                inner.finalized.insert(game);
            }
        }
        Ok(n)
    }

    pub fn save(&self, path: &std::path::Path) -> Result<(), MemoryError> {
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, self.export_jsonl())?;
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn load(path: &std::path::Path, embedder: Arc<dyn Embedder>) -> Result<Self, MemoryError> {
        let pool = Self::new(embedder);
        if path.exists() {
            pool.import_jsonl(&std::fs::read_to_string(path)?)?;
        }
        Ok(pool)
    }
}

/// Parses a pool export, checking the header and per-line schema. Errors
/// carry 1-based line numbers.
pub fn parse_pool(text: &str, expected_embedder: &str) -> Result<Vec<Experience>, MemoryError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let bad = |line: usize, msg: String| MemoryError::PoolFormat { line: line + 1, message: msg };
    let Some((hl, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    match serde_json::from_str::<PoolLine>(header).map_err(|e| bad(hl, e.to_string()))? {
        PoolLine::PoolHeader {
            schema_version,
            embedder,
        } => {
            if schema_version != POOL_SCHEMA_VERSION {
                return Err(bad(hl, format!("unsupported schema_version {schema_version}")));
            }
            if embedder != expected_embedder {
                return Err(bad(hl, format!("pool built with {embedder}, expected {expected_embedder}")));
            }
        }
        PoolLine::Experience(_) => return Err(bad(hl, "missing pool_header line".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        match serde_json::from_str::<PoolLine>(line).map_err(|e| bad(i, e.to_string()))? {
            PoolLine::Experience(e) => {
                if e.embedding.iter().any(|x| !x.is_finite()) || e.reward.is_some_and(|r| !r.is_finite()) {
                    return Err(bad(i, "non-finite number".into()));
                }
                out.push(e)
            }
            PoolLine::PoolHeader { .. } => return Err(bad(i, "duplicate pool_header".into())),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::memory::HashEmbedder;

    fn tags(seat: u8, game: &str, round: u32) -> ExperienceTags {
        ExperienceTags {
            seat: Seat(seat),
            role: Role::Villager,
            model_tag: "m".into(),
            game_id: game.into(),
            round,
        }
    }

    fn pool() -> ExperiencePool {
        ExperiencePool::new(Arc::new(HashEmbedder))
    }

    #[test]
    fn reward_spot_values() {
        assert_eq!((reward_for(true, 6), reward_for(false, 6)), (994.0, 6.0));
        assert_eq!((reward_for(true, 1), reward_for(false, 1)), (999.0, 1.0));
        assert_eq!(reward_for(true, 500), reward_for(false, 500));
    }

    #[test]
    fn add_then_finalize() {
        let p = pool();
        let a = p.add_experience("seat 3 lied about being seer", tags(1, "g1", 2)).unwrap();
        let b = p.add_experience("seat 3 still suspicious", tags(1, "g1", 3)).unwrap();
        p.add_experience("seat 5 defended seat 3", tags(4, "g1", 2)).unwrap();
        assert_ne!(a, b);
        assert!(p.entries().iter().all(|e| e.reward.is_none()));
        let outcome = GameOutcomeRecord {
            game_id: "g1".into(),
            winner: Camp::Good,
            total_rounds: 6,
        };
        assert_eq!(p.finalize_rewards(&outcome, &[Seat(1)].into_iter().collect()).unwrap(), 3);
        let rewards: Vec<_> = p.entries().iter().map(|e| e.reward.unwrap()).collect();
        assert_eq!(rewards, vec![994.0, 994.0, 6.0]);
        assert_eq!(
            p.finalize_rewards(&outcome, &BTreeSet::new()),
            Err(MemoryError::AlreadyFinalized("g1".into()))
        );
        let unknown = GameOutcomeRecord {
            game_id: "nope".into(),
            ..outcome
        };
        assert_eq!(
            p.finalize_rewards(&unknown, &BTreeSet::new()),
            Err(MemoryError::UnknownGame("nope".into()))
        );
        assert_eq!(p.add_experience("  ", tags(1, "g2", 1)), Err(MemoryError::EmptySummary));
    }

    #[test]
    fn threshold_then_reward() {
        // Unit vectors at chosen angles to the query e0.
        let p = pool();
        let at = |sim: f64| vec![sim, (1.0 - sim * sim).sqrt()];
        for (sim, reward) in [(0.7, 994.0), (0.6, 6.0), (0.4, 994.0)] {
            p.insert("x".into(), at(sim), Some(reward), tags(0, "g", 1)).unwrap();
        }
        let cfg = RetrievalConfig {
            k: 2,
            ..RetrievalConfig::default()
        };
        let got: Vec<u64> = p
            .retrieve_embedding(&[1.0, 0.0], &cfg)
            .unwrap()
            .iter()
            .map(|r| r.experience.id)
            .collect();
        assert_eq!(got, vec![0, 1]);
        assert!(pool().retrieve("anything", &cfg).unwrap().is_empty());
    }

    #[test]
    fn pending_entries_never_retrieved() {
        let p = pool();
        p.add_experience("wolf wolf", tags(0, "g", 1)).unwrap();
        let cfg = RetrievalConfig {
            threshold: 0.0,
            ..RetrievalConfig::default()
        };
        assert!(p.retrieve("wolf wolf", &cfg).unwrap().is_empty());
    }

    #[test]
    fn ties_fall_back_to_similarity_then_recency() {
        let p = pool();
        for (v, r) in [([1.0, 0.0], 5.0), ([0.8, 0.6], 5.0), ([1.0, 0.0], 5.0)] {
            p.insert("x".into(), v.to_vec(), Some(r), tags(0, "g", 1)).unwrap();
        }
        let ids: Vec<u64> = p
            .retrieve_embedding(&[1.0, 0.0], &RetrievalConfig::default())
            .unwrap()
            .iter()
            .map(|r| r.experience.id)
            .collect();
        assert_eq!(ids, vec![2, 0, 1]);
    }

    #[test]
    fn filter_restricts_tags() {
        let p = pool();
        let mut t = tags(2, "g", 1);
        t.role = Role::Seer;
        p.insert("x".into(), vec![1.0], Some(1.0), t).unwrap();
        p.insert("x".into(), vec![1.0], Some(2.0), tags(3, "g", 1)).unwrap();
        let cfg = RetrievalConfig {
            filter: TagFilter {
                role: Some(Role::Seer),
                ..TagFilter::default()
            },
            ..RetrievalConfig::default()
        };
        let got = p.retrieve_embedding(&[1.0], &cfg).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].experience.tags.seat, Seat(2));
    }

    #[test]
    fn export_import_round_trip() {
        let p = pool();
        p.add_experience("guard protected seat 4", tags(0, "g", 1)).unwrap();
        p.add_experience("pending one", tags(0, "h", 1)).unwrap();
        p.finalize_rewards(
            &GameOutcomeRecord {
                game_id: "g".into(),
                winner: Camp::Wolf,
                total_rounds: 3,
            },
            &BTreeSet::new(),
        )
        .unwrap();
        let text = p.export_jsonl();
        let q = pool();
        assert_eq!(q.import_jsonl(&text).unwrap(), 2);
        assert_eq!(q.entries(), p.entries());
        assert!(q
            .finalize_rewards(
                &GameOutcomeRecord {
                    game_id: "g".into(),
                    winner: Camp::Wolf,
                    total_rounds: 3
                },
                &BTreeSet::new()
            )
            .is_err());
        let broken = text.replacen("\"summary\"", "\"summry\"", 1);
        match q.import_jsonl(&broken) {
            Err(MemoryError::PoolFormat { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
