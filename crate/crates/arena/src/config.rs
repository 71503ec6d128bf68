use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use werewolf_core::game::{GameConfig, GuardSaveInteraction, Role};
use werewolf_core::log::digest_json;
use werewolf_core::memory::RetrievalConfig;
use werewolf_gateway::{GenerationParams, HttpProviderConfig, RetryPolicy};

/// Slot names usable in `[assignment]` without a `[models]` entry.
pub const BUILTIN_SLOTS: [&str; 3] = ["random", "heuristic", "mock"];

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("invalid experiment config:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),
}

/// A whole experiment: one board, one model assignment, `n_games` seeded
/// games.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_games")]
    pub n_games: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    /// Concurrent games; ignored (forced to 1) while the pool is enabled.
    #[serde(default = "one")]
    pub parallelism: usize,
    /// Games still running after this many rounds are aborted.
    #[serde(default = "default_max_rounds")]
    pub max_rounds: u32,
    /// Label for report rows; derived from the assignment when absent.
    #[serde(default)]
    pub matchup: Option<String>,
    pub game: GameSection,
    #[serde(default)]
    pub models: BTreeMap<String, ModelSlot>,
    /// Role name, camp (`wolf`/`good`) or `*` → model slot name.
    #[serde(default)]
    pub assignment: BTreeMap<String, String>,
    #[serde(default)]
    pub pool: PoolSection,
    #[serde(default)]
    pub embedding: EmbeddingSection,
    #[serde(default)]
    pub prompts: PromptSection,
    #[serde(default)]
    pub metrics: MetricsSection,
}

fn default_games() -> u64 {
    10
}

fn default_output() -> PathBuf {
    PathBuf::from("runs/default")
}

fn one() -> usize {
    1
}

fn default_max_rounds() -> u32 {
    50
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub n_players: usize,
    /// Standard board for the player count when absent.
    #[serde(default)]
    pub roster: Option<Vec<Role>>,
    #[serde(default)]
    pub sheriff_enabled: bool,
    #[serde(default)]
    pub guard_save_interaction: GuardSaveInteraction,
    #[serde(default)]
    pub witch_both_potions_same_night: bool,
    #[serde(default)]
    pub hunter_shoots_when_poisoned: bool,
    #[serde(default)]
    pub wolf_win_on_equal: bool,
    #[serde(default = "half")]
    pub alpha_guard: f64,
    #[serde(default = "half")]
    pub alpha_wolf: f64,
    #[serde(default = "half")]
    pub alpha_kre: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSlot {
    /// Chat-completions endpoint.
    Chat {
        base_url: String,
        model: String,
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default = "default_concurrency")]
        max_concurrent: usize,
        #[serde(default)]
        params: GenerationParams,
        #[serde(default)]
        retry: RetryPolicy,
    },
    /// Offline model stand-in that always answers legally. With `fail` set
    /// every call fails with a transient error instead.
    Mock {
        #[serde(default)]
        fail: bool,
        #[serde(default)]
        retry: RetryPolicy,
    },
    Random {},
    Heuristic {},
}

fn default_timeout() -> u64 {
    120
}

fn default_concurrency() -> usize {
    4
}

impl ModelSlot {
    pub fn builtin(name: &str) -> Option<ModelSlot> {
        match name {
            "random" => Some(ModelSlot::Random {}),
            "heuristic" => Some(ModelSlot::Heuristic {}),
            "mock" => Some(ModelSlot::Mock {
                fail: false,
                retry: RetryPolicy::default(),
            }),
            _ => None,
        }
    }

    pub fn http_config(&self) -> Option<HttpProviderConfig> {
        match self {
            ModelSlot::Chat {
                base_url,
                model,
                api_key_env,
                timeout_secs,
                max_concurrent,
                ..
            } => Some(HttpProviderConfig {
                base_url: base_url.clone(),
                model: model.clone(),
                api_key_env: api_key_env.clone(),
                timeout_secs: *timeout_secs,
                max_concurrent: *max_concurrent,
            }),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolSection {
    #[serde(default)]
    pub enabled: bool,
    /// Which seats consult and feed the pool: role names, camps or `*`.
    #[serde(default = "everyone")]
    pub players: Vec<String>,
    /// Defaults to `<output_dir>/pool.jsonl`. Loaded at start when present,
    /// saved after every game.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "half")]
    pub threshold: f64,
    /// Retrieve only experiences recorded by the same role.
    #[serde(default)]
    pub match_role: bool,
}

fn everyone() -> Vec<String> {
    vec!["*".to_string()]
}

fn default_k() -> usize {
    3
}

impl Default for PoolSection {
    fn default() -> Self {
        Self {
            enabled: false,
            players: everyone(),
            path: None,
            k: default_k(),
            threshold: 0.5,
            match_role: false,
        }
    }
}

impl PoolSection {
    pub fn retrieval(&self) -> RetrievalConfig {
        RetrievalConfig {
            k: self.k,
            threshold: self.threshold,
            ..RetrievalConfig::default()
        }
    }

    /// Same precedence as model assignment: any listed key covering the role.
    pub fn covers(&self, role: Role) -> bool {
        let camp = role.camp().to_string();
        self.players
            .iter()
            .any(|k| k == "*" || k == role.name() || *k == camp)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSection {
    /// Deterministic hashed bag of words.
    #[default]
    Hash,
    Service {
        base_url: String,
        model: String,
        #[serde(default)]
        api_key_env: Option<String>,
        #[serde(default = "default_timeout")]
        timeout_secs: u64,
        #[serde(default = "default_concurrency")]
        max_concurrent: usize,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PromptSection {
    /// Directory of `<name>.txt` files overriding built-in templates.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricsSection {
    /// Score the guard's second term as "guarded seat died that night".
    #[serde(default)]
    pub guard_literal: bool,
}

const ASSIGNMENT_KEYS: [&str; 9] = [
    "*", "wolf", "good", "werewolf", "villager", "seer", "witch", "hunter", "guard",
];

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Relative paths inside the file resolve against the file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg = Self::from_toml(&text).map_err(|e| match e {
            ConfigError::Parse(m) => ConfigError::Parse(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.output_dir);
        if let Some(p) = cfg.pool.path.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.prompts.dir.as_mut() {
            rebase(p);
        }
        Ok(cfg)
    }

    /// Every violation, not just the first.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut problems = Vec::new();
        if self.n_games == 0 {
            problems.push("n_games must be at least 1".to_string());
        }
        if self.parallelism == 0 {
            problems.push("parallelism must be at least 1".to_string());
        }
        if self.max_rounds == 0 {
            problems.push("max_rounds must be at least 1".to_string());
        }
        if let Err(e) = self.game_config(0).validate() {
            problems.push(format!("game: {e}"));
        }
        for (key, slot) in &self.assignment {
            if !ASSIGNMENT_KEYS.contains(&key.as_str()) {
                problems.push(format!("assignment key `{key}` is not a role, a camp or `*`"));
            }
            if self.slot(slot).is_none() {
                problems.push(format!("assignment `{key}` names undefined model slot `{slot}`"));
            }
        }
        for name in self.models.keys() {
            if BUILTIN_SLOTS.contains(&name.as_str()) {
                problems.push(format!("model slot `{name}` shadows a built-in slot"));
            }
        }
        for key in &self.pool.players {
            if !ASSIGNMENT_KEYS.contains(&key.as_str()) {
                problems.push(format!("pool.players entry `{key}` is not a role, a camp or `*`"));
            }
        }
        if let Err(e) = self.pool.retrieval().validate() {
            problems.push(format!("pool: {e}"));
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(problems))
        }
    }

    pub fn slot(&self, name: &str) -> Option<ModelSlot> {
        self.models.get(name).cloned().or_else(|| ModelSlot::builtin(name))
    }

    /// Board and rules for one game. Unassigned seats play `random`.
    pub fn game_config(&self, seed: u64) -> GameConfig {
        let g = &self.game;
        let roster = g
            .roster
            .clone()
            .or_else(|| GameConfig::standard_roster(g.n_players))
            .unwrap_or_default();
        let mut model_assignment = self.assignment.clone();
        model_assignment
            .entry("*".to_string())
            .or_insert_with(|| "random".to_string());
        GameConfig {
            n_players: g.n_players,
            roster,
            sheriff_enabled: g.sheriff_enabled,
            guard_save_interaction: g.guard_save_interaction,
            witch_both_potions_same_night: g.witch_both_potions_same_night,
            hunter_shoots_when_poisoned: g.hunter_shoots_when_poisoned,
            wolf_win_on_equal: g.wolf_win_on_equal,
            alpha_guard: g.alpha_guard,
            alpha_wolf: g.alpha_wolf,
            alpha_kre: g.alpha_kre,
            seed,
            model_assignment,
        }
    }

    pub fn matchup_label(&self) -> String {
        self.matchup.clone().unwrap_or_else(|| {
            let parts: Vec<String> = if self.assignment.is_empty() {
                vec!["*=random".to_string()]
            } else {
                self.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect()
            };
            let sheriff = if self.game.sheriff_enabled { "+sheriff" } else { "" };
            format!("{}p{sheriff}:{}", self.game.n_players, parts.join(","))
        })
    }

    pub fn pool_path(&self) -> PathBuf {
        self.pool.path.clone().unwrap_or_else(|| self.output_dir.join("pool.jsonl"))
    }

    /// Digest of everything that shapes game content. Output location,
    /// parallelism and the pool file path are left out so that the same
    /// experiment logs the same bytes wherever it runs.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.output_dir = PathBuf::new();
        c.parallelism = 1;
        c.pool.path = None;
        digest_json(&c)
    }
}
