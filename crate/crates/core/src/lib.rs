pub mod agent;
pub mod game;
pub mod log;
pub mod memory;
pub mod metrics;
pub mod rng;
