//! Character scores and player metrics, computed only from event logs.

mod report;
mod scores;
mod view;

pub use report::{build_report, render_ablation, render_table, MetricReport, MetricRow, ScoredGame};
pub use scores::{
    character_score, god_instances, guard_score, hunter_score, irp_ratio, kre_from_instances, seer_score,
    sheriff_rounds, vss_ratio, werewolf_score, witch_score, GodInstance, Ratio, ScoreParams, SheriffRound,
};
pub use view::{Ballot, GameLogView, Inference};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("log has no GameOver event")]
    Incomplete,
    #[error("inconsistent log: {0}")]
    Inconsistent(String),
    #[error("game was aborted: {0}")]
    Aborted(String),
    #[error("no games to report")]
    NoGames,
}
