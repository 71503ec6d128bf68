//! Experiment harness: configuration, seeded game execution, replay
//! verification and metric reports.

pub mod config;
pub mod replay;
pub mod report;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, ModelSlot};
pub use replay::{replay, replay_file, ReplayVerdict};
pub use runner::{legal_mock_provider, Arena, ContextObserver, GameOutcome, RunError, RunSummary};
