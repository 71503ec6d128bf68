pub mod event;
pub mod night;
pub mod protocol;
pub mod state;
pub mod types;
pub mod vote;

pub use event::{Audience, DeathCause, Direction, GameEvent, NightActionKind, VoteKind};
pub use night::{resolve_wolf_target, NightActions, NightOutcome};
pub use protocol::{ActionRequest, AgentResponse, RequestKind, RequestTag};
pub use state::{new_game, win_for, EngineError, GameState, Phase};
pub use types::{Camp, ConfigError, GameConfig, GuardSaveInteraction, PlayerSeat, Role, Seat};
pub use vote::{
    ballot_weight, election_step, tally_votes, ElectionStep, TallyOutcome, TallyResult, VoteRound,
    SHERIFF_WEIGHT,
};
