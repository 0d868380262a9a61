//! Tabular Q-learning hyperparameter tuning driven by the FOX metaheuristic.
//!
//! The crate is organized bottom-up:
//! - [`envs`]: FrozenLake and CartPole with a common episodic interface.
//! - [`qlearn`]: the tabular learner (TD error, table update, training loop).
//! - [`opt`]: shared optimizer types (bounds, candidates, objectives).
//! - [`fox`]: the FOX optimization algorithm.
//! - [`baselines`]: PSO, GA, BA and random search behind the same interface.
//! - [`tuner`]: the composite fitness and the run/iteration/agent orchestration.

pub mod baselines;
pub mod envs;
pub mod fox;
pub mod opt;
pub mod qlearn;
pub mod seed;
pub mod tuner;

pub use envs::{CartPoleEnv, Discretizer, EnvError, Environment, FrozenLakeEnv, Transition};
pub use opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
pub use qlearn::{EpisodeTrace, EpsilonSchedule, Hyperparams, QTable};
pub use tuner::{FitnessReport, TaskSpec, TuneResult, TuneSettings};
