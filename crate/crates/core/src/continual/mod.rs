//! Sequential-task training: access-controlled streams, frozen
//! snapshots, strategies and the run orchestrator.

pub mod runner;
pub mod snapshot;
pub mod strategy;
pub mod stream;

pub use runner::{replay_sample, replay_state_bytes, run_continual, RunOptions, RunResult};
pub use snapshot::{freeze, FrozenSnapshot};
pub use strategy::{Preset, Strategy, StrategyConfig, DEFAULT_EWC_LAMBDA};
pub use stream::{FullView, StageView, StreamData, TaskStream};
