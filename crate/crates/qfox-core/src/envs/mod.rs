//! Episodic control-task environments with discrete states and actions.

pub mod cart_pole;
pub mod frozen_lake;

pub use cart_pole::{CartPoleEnv, Discretizer};
pub use frozen_lake::{Cell, FrozenLakeEnv};

use rand::RngCore;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("step called on a finished episode")]
    EpisodeFinished,
    #[error("action {action} out of range (action_count {action_count})")]
    InvalidAction { action: usize, action_count: usize },
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
}

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub reward: f64,
    /// Episode ended by task rules (goal, hole, pole fell).
    pub terminated: bool,
    /// Episode ended by the step cap.
    pub truncated: bool,
}

/// Common episodic interface for tabular learning.
///
/// Instances are single-threaded and owned by one training run; independent
/// instances with independent RNG streams may run concurrently.
pub trait Environment: Send {
    fn state_count(&self) -> usize;
    fn action_count(&self) -> usize;
    fn step_cap(&self) -> usize;

    /// Reinitialize the episode and return the starting state index.
    fn reset(&mut self, rng: &mut dyn RngCore) -> usize;

    /// Advance one step. Stepping a finished episode is rejected.
    fn step(&mut self, action: usize, rng: &mut dyn RngCore) -> Result<Transition, EnvError>;
}
