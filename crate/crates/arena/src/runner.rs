use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;
use werewolf_core::agent::{
    build_context, legal_reply, Agent, AgentContext, BaselineAgent, BaselineKind, Decision, LlmAgent, PromptTemplates,
};
use werewolf_core::game::{new_game, GameConfig, GameState, RequestTag, Seat};
use werewolf_core::log::{digest_json, GameLog, InputRecord, LogHeader, LOG_SCHEMA_VERSION};
use werewolf_core::memory::{
    Embedder, ExperiencePool, ExperienceTags, ExtractiveSummarizer, GameOutcomeRecord, HashEmbedder, LlmSummarizer,
    RetrievalConfig, Retrieved, ServiceEmbedder, Summarizer, TagFilter,
};
use werewolf_core::rng::derive_seed;
use werewolf_gateway::{
    ChatProvider, GatewayError, GenerationParams, HttpChatProvider, HttpEmbeddingProvider, HttpProviderConfig,
    MockProvider, RetryingProvider,
};

use crate::config::{EmbeddingSection, ExperimentConfig, ModelSlot};

/// Called with every context handed to an agent.
pub type ContextObserver = Arc<dyn Fn(&AgentContext) + Send + Sync>;

const SUMMARY_INSTRUCTIONS: &str = "summary";

#[derive(Debug, Error)]
pub enum RunError {
    #[error("config: {0}")]
    Config(String),
    #[error("io at {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("experience pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How one model slot answers.
#[derive(Clone)]
enum SlotRuntime {
    Baseline(BaselineKind),
    Model {
        provider: Arc<dyn ChatProvider>,
        params: GenerationParams,
    },
}

/// Shared, immutable per-experiment resources.
pub struct Arena {
    config: ExperimentConfig,
    digest: String,
    slots: BTreeMap<String, SlotRuntime>,
    templates: Arc<PromptTemplates>,
    pool: Option<ExperiencePool>,
    observer: Option<ContextObserver>,
}

/// Deterministic offline stand-in: a mock provider answering every prompt
/// with a legal reply.
pub fn legal_mock_provider() -> MockProvider {
    MockProvider::new("I pass.")
        .with_name("mock")
        .with_responder(Arc::new(legal_reply))
}

fn slot_runtime(slot: &ModelSlot) -> SlotRuntime {
    match slot {
        ModelSlot::Random {} => SlotRuntime::Baseline(BaselineKind::Random),
        ModelSlot::Heuristic {} => SlotRuntime::Baseline(BaselineKind::Heuristic),
        ModelSlot::Mock { fail, retry } => {
            let inner = if *fail {
                MockProvider::always_failing(GatewayError::Transient("mock outage".into())).with_name("mock-failing")
            } else {
                legal_mock_provider()
            };
            SlotRuntime::Model {
                provider: Arc::new(RetryingProvider::new(inner, *retry)),
                params: GenerationParams::default(),
            }
        }
        ModelSlot::Chat { params, retry, .. } => {
            let http = HttpChatProvider::new(slot.http_config().expect("chat slot"));
            SlotRuntime::Model {
                provider: Arc::new(RetryingProvider::new(http, *retry)),
                params: *params,
            }
        }
    }
}

pub fn embedder_for(section: &EmbeddingSection) -> Arc<dyn Embedder> {
    match section {
        EmbeddingSection::Hash => Arc::new(HashEmbedder),
        EmbeddingSection::Service {
            base_url,
            model,
            api_key_env,
            timeout_secs,
            max_concurrent,
        } => {
            let provider = HttpEmbeddingProvider::new(HttpProviderConfig {
                base_url: base_url.clone(),
                model: model.clone(),
                api_key_env: api_key_env.clone(),
                timeout_secs: *timeout_secs,
                max_concurrent: *max_concurrent,
            });
            Arc::new(ServiceEmbedder::new(provider, format!("service:{model}")))
        }
    }
}

/// Loads the persisted pool for this experiment, or an empty one.
pub fn open_pool(config: &ExperimentConfig) -> Result<ExperiencePool, RunError> {
    let embedder = embedder_for(&config.embedding);
    let path = config.pool_path();
    if path.exists() {
        ExperiencePool::load(&path, embedder).map_err(|e| RunError::Pool(e.to_string()))
    } else {
        Ok(ExperiencePool::new(embedder))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GameStatus {
    Finished,
    Aborted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameRecord {
    pub index: u64,
    pub seed: u64,
    pub file: String,
    pub status: GameStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub experiment_digest: String,
    pub games: Vec<GameRecord>,
}

impl RunSummary {
    pub fn aborted(&self) -> usize {
        self.games.iter().filter(|g| g.status == GameStatus::Aborted).count()
    }
}

/// Everything a finished (or aborted) game produced.
pub struct GameOutcome {
    pub index: u64,
    pub seed: u64,
    pub log: GameLog,
}

impl Arena {
    pub fn new(config: ExperimentConfig) -> Result<Self, RunError> {
        config.validate().map_err(|e| RunError::Config(e.to_string()))?;
        let templates = match &config.prompts.dir {
            Some(dir) => PromptTemplates::with_overrides(dir).map_err(|e| RunError::Config(e.to_string()))?,
            None => PromptTemplates::default(),
        };
        let mut slots = BTreeMap::new();
        for name in config.game_config(0).model_assignment.values() {
            let slot = config
                .slot(name)
                .ok_or_else(|| RunError::Config(format!("undefined model slot `{name}`")))?;
            slots.entry(name.clone()).or_insert_with(|| slot_runtime(&slot));
        }
        let pool = if config.pool.enabled { Some(open_pool(&config)?) } else { None };
        Ok(Self {
            digest: config.digest(),
            config,
            slots,
            templates: Arc::new(templates),
            pool,
            observer: None,
        })
    }

    pub fn with_observer(mut self, observer: ContextObserver) -> Self {
        self.observer = Some(observer);
        self
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn pool(&self) -> Option<&ExperiencePool> {
        self.pool.as_ref()
    }

    pub fn game_seed(&self, index: u64) -> u64 {
        derive_seed(self.config.master_seed, index)
    }

    fn agent_for(&self, slot: &str, game_seed: u64, seat: Seat) -> (Box<dyn Agent>, Box<dyn Summarizer>) {
        match &self.slots[slot] {
            SlotRuntime::Baseline(kind) => (
                Box::new(BaselineAgent {
                    kind: *kind,
                    seed: derive_seed(game_seed, 1000 + u64::from(seat.0)),
                }),
                Box::new(ExtractiveSummarizer::default()),
            ),
            SlotRuntime::Model { provider, params } => (
                Box::new(LlmAgent::new(provider.clone(), *params, self.templates.clone())),
                Box::new(LlmSummarizer::new(
                    provider.clone(),
                    *params,
                    self.templates.get(SUMMARY_INSTRUCTIONS).to_string(),
                )),
            ),
        }
    }

    /// Plays game `index` to the end, or until an agent or the engine fails.
    pub fn play(&self, index: u64) -> GameOutcome {
        let seed = self.game_seed(index);
        let game_config = self.config.game_config(seed);
        let game_id = format!("g{index:04}-{seed:016x}");
        let header = LogHeader {
            schema_version: LOG_SCHEMA_VERSION,
            game_id: game_id.clone(),
            game_index: index,
            game_seed: seed,
            experiment_digest: self.digest.clone(),
            game_config_digest: digest_json(&game_config),
            game_config: game_config.clone(),
            matchup: self.config.matchup_label(),
        };
        let mut log = GameLog::new(header);
        if let Err(reason) = self.drive(&game_id, seed, game_config, &mut log) {
            tracing::warn!(game = %game_id, %reason, "game aborted");
            log.abort(reason);
        }
        GameOutcome { index, seed, log }
    }

    fn drive(&self, game_id: &str, seed: u64, game_config: GameConfig, log: &mut GameLog) -> Result<(), String> {
        let mut state = new_game(game_config).map_err(|e| e.to_string())?;
        log.push_events(state.events().iter().cloned());
        let agents: Vec<(Box<dyn Agent>, Box<dyn Summarizer>)> = state
            .players()
            .iter()
            .map(|p| self.agent_for(&p.model_tag, seed, p.seat))
            .collect();
        while !state.is_over() {
            if state.round() > self.config.max_rounds {
                return Err(format!("round limit {} exceeded", self.config.max_rounds));
            }
            let pending = state.pending_requests();
            let mut responses = Vec::with_capacity(pending.len());
            for req in &pending {
                let (agent, summarizer) = &agents[req.seat.index()];
                let (retrieved, summary) = self.consult_pool(&state, game_id, req, summarizer.as_ref(), agent.uses_model())?;
                let ctx = build_context(&state, req, retrieved, summary).map_err(|e| e.to_string())?;
                if let Some(observe) = &self.observer {
                    observe(&ctx);
                }
                let decision = agent
                    .decide(&ctx)
                    .map_err(|e| format!("{} ({}): {e}", req.seat, req.tag()))?;
                let decision = match GameState::validate_response(req, &decision.response) {
                    Ok(()) => decision,
                    Err(e) => {
                        tracing::warn!(seat = req.seat.0, error = %e, "illegal answer replaced by default");
                        Decision {
                            response: req.fallback(),
                            fallback: true,
                            attempts: decision.attempts,
                        }
                    }
                };
                log.push_input(InputRecord {
                    seat: req.seat,
                    response: decision.response.clone(),
                    fallback: decision.fallback,
                    attempts: decision.attempts,
                });
                responses.push((req.seat, decision.response));
            }
            let events = state.submit(responses).map_err(|e| e.to_string())?;
            log.push_events(events);
        }
        if let Some(pool) = &self.pool {
            let winner = state.winner().expect("game over has a winner");
            let winners: BTreeSet<Seat> = state
                .players()
                .iter()
                .filter(|p| p.role.camp() == winner)
                .map(|p| p.seat)
                .collect();
            let outcome = GameOutcomeRecord {
                game_id: game_id.to_string(),
                winner,
                total_rounds: state.round(),
            };
            match pool.finalize_rewards(&outcome, &winners) {
                Ok(_) | Err(werewolf_core::memory::MemoryError::UnknownGame(_)) => {}
                Err(e) => return Err(format!("pool: {e}")),
            }
        }
        Ok(())
    }

    /// Retrieval happens only before binding ballots, and only for seats the
    /// pool covers. The seat's own summary is the query and is then stored.
    fn consult_pool(
        &self,
        state: &GameState,
        game_id: &str,
        req: &werewolf_core::game::ActionRequest,
        summarizer: &dyn Summarizer,
        uses_model: bool,
    ) -> Result<(Vec<Retrieved>, Option<String>), String> {
        let Some(pool) = &self.pool else {
            return Ok((Vec::new(), None));
        };
        let role = state.role_of(req.seat).expect("request seat exists");
        let binding = matches!(req.tag(), RequestTag::OfficialBallot | RequestTag::TiebreakBallot);
        if !binding || !self.config.pool.covers(role) {
            return Ok((Vec::new(), None));
        }
        let view = build_context(state, req, Vec::new(), None).map_err(|e| e.to_string())?;
        let mut lines = view.private_lines();
        lines.extend(view.transcript_lines());
        let summary = summarizer.summarize(&lines).map_err(|e| format!("summary: {e}"))?;
        let retrieval = RetrievalConfig {
            filter: TagFilter {
                role: self.config.pool.match_role.then_some(role),
                ..TagFilter::default()
            },
            ..self.config.pool.retrieval()
        };
        let retrieved = pool.retrieve(&summary, &retrieval).map_err(|e| format!("retrieval: {e}"))?;
        pool.add_experience(
            &summary,
            ExperienceTags {
                seat: req.seat,
                role,
                model_tag: state.model_of(req.seat).unwrap_or_default().to_string(),
                game_id: game_id.to_string(),
                round: state.round(),
            },
        )
        .map_err(|e| format!("pool: {e}"))?;
        Ok((retrieved, uses_model.then_some(summary)))
    }

    /// Runs every game, writing `logs/game_NNNN.jsonl`, `experiment.json`
    /// and, with the pool enabled, the pool file after each game.
    pub fn run(&self) -> Result<RunSummary, RunError> {
        let out = &self.config.output_dir;
        let logs_dir = out.join("logs");
        std::fs::create_dir_all(&logs_dir).map_err(io_err(&logs_dir))?;
        let n = self.config.n_games;
        // Pool updates must happen in game order to stay reproducible.
        let workers = if self.pool.is_some() {
            1
        } else {
            self.config.parallelism.min(n as usize).max(1)
        };
        let next = AtomicUsize::new(0);
        let records: Mutex<Vec<GameRecord>> = Mutex::new(Vec::new());
        let failure: Mutex<Option<RunError>> = Mutex::new(None);
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::SeqCst) as u64;
                    if index >= n || failure.lock().unwrap().is_some() {
                        break;
                    }
                    match self.play_and_write(index, &logs_dir) {
                        Ok(rec) => records.lock().unwrap().push(rec),
                        Err(e) => {
                            failure.lock().unwrap().get_or_insert(e);
                        }
                    }
                });
            }
        });
        if let Some(e) = failure.into_inner().unwrap() {
            return Err(e);
        }
        let mut games = records.into_inner().unwrap();
        games.sort_by_key(|g| g.index);
        let summary = RunSummary {
            experiment_digest: self.digest.clone(),
            games,
        };
        let manifest = serde_json::json!({
            "experiment_digest": summary.experiment_digest,
            "config": self.config,
            "games": summary.games,
        });
        let path = out.join("experiment.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).expect("serializable") + "\n")
            .map_err(io_err(&path))?;
        Ok(summary)
    }

    fn play_and_write(&self, index: u64, logs_dir: &Path) -> Result<GameRecord, RunError> {
        let outcome = self.play(index);
        let file = format!("game_{index:04}.jsonl");
        let path = logs_dir.join(&file);
        std::fs::write(&path, outcome.log.to_jsonl()).map_err(io_err(&path))?;
        if let Some(pool) = &self.pool {
            let pool_path = self.config.pool_path();
            if let Some(dir) = pool_path.parent() {
                std::fs::create_dir_all(dir).map_err(io_err(dir))?;
            }
            pool.save(&pool_path).map_err(|e| RunError::Pool(e.to_string()))?;
        }
        let reason = outcome.log.aborted().map(str::to_string);
        tracing::info!(game = index, file = %file, aborted = reason.is_some(), "game written");
        Ok(GameRecord {
            index,
            seed: outcome.seed,
            file,
            status: if reason.is_some() { GameStatus::Aborted } else { GameStatus::Finished },
            reason,
        })
    }
}
