//! Tabular Q-learning: TD error, table update, epsilon-greedy policy and the
//! episodic training loop.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::envs::{EnvError, Environment};

pub const ALPHA_MIN: f64 = 0.01;
pub const ALPHA_MAX: f64 = 1.0;
pub const GAMMA_MIN: f64 = 0.0;
pub const GAMMA_MAX: f64 = 1.0;

#[derive(Debug, Error)]
pub enum QlearnError {
    #[error("hyperparameters out of range: alpha={alpha}, gamma={gamma}")]
    InvalidHyperparams { alpha: f64, gamma: f64 },
    #[error("training needs at least 4 episodes, got {0}")]
    TooFewEpisodes(usize),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// The tuned pair: step size and discount factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub alpha: f64,
    pub gamma: f64,
}

impl Hyperparams {
    pub fn new(alpha: f64, gamma: f64) -> Result<Self, QlearnError> {
        let ok = alpha.is_finite()
            && gamma.is_finite()
            && (ALPHA_MIN..=ALPHA_MAX).contains(&alpha)
            && (GAMMA_MIN..=GAMMA_MAX).contains(&gamma);
        if ok {
            Ok(Self { alpha, gamma })
        } else {
            Err(QlearnError::InvalidHyperparams { alpha, gamma })
        }
    }
}

/// Dense action-value table, zero-initialized.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    states: usize,
    actions: usize,
}

impl QTable {
    pub fn zeros(states: usize, actions: usize) -> Self {
        Self { values: vec![0.0; states * actions], states, actions }
    }

    pub fn state_count(&self) -> usize {
        self.states
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.actions + action] = value;
    }

    pub fn row(&self, state: usize) -> &[f64] {
        &self.values[state * self.actions..(state + 1) * self.actions]
    }

    /// Greatest action value in a state.
    pub fn max_value(&self, state: usize) -> f64 {
        self.row(state).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Argmax with lowest-index tie break.
    pub fn argmax(&self, state: usize) -> usize {
        let row = self.row(state);
        let mut best = 0;
        for (a, &v) in row.iter().enumerate().skip(1) {
            if v > row[best] {
                best = a;
            }
        }
        best
    }
}

/// Temporal-difference error: `r + gamma * max_a' Q(s', a') - Q(s, a)`.
/// The bootstrap term is zeroed on terminal transitions.
pub fn td_error(
    q: &QTable,
    state: usize,
    action: usize,
    reward: f64,
    next_state: usize,
    terminated: bool,
    gamma: f64,
) -> f64 {
    let bootstrap = if terminated { 0.0 } else { q.max_value(next_state) };
    reward + gamma * bootstrap - q.get(state, action)
}

/// In-place update `Q(s,a) += alpha * delta`; touches exactly one cell.
pub fn update(q: &mut QTable, state: usize, action: usize, alpha: f64, delta: f64) {
    let v = q.get(state, action);
    q.set(state, action, v + alpha * delta);
}

/// Epsilon-greedy: uniform random action with probability `epsilon`,
/// otherwise the greedy argmax (lowest-index ties).
pub fn select_action(q: &QTable, state: usize, epsilon: f64, rng: &mut dyn RngCore) -> usize {
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        rng.random_range(0..q.action_count())
    } else {
        q.argmax(state)
    }
}

/// Greedy action per state.
pub fn greedy_policy(q: &QTable) -> Vec<usize> {
    (0..q.state_count()).map(|s| q.argmax(s)).collect()
}

/// Per-episode record feeding the tuning fitness.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    /// Sum of rewards over the episode.
    pub total_reward: f64,
    /// Mean absolute TD error over the episode's steps.
    pub td_error_mag: f64,
    /// Steps taken (>= 1).
    pub steps: usize,
}

/// Multiplicative epsilon decay per episode with a floor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub decay: f64,
    pub floor: f64,
}

impl EpsilonSchedule {
    /// Epsilon for an episode, capped into [0, 1]. A `start` above 1 holds
    /// epsilon at 1 until the decayed value drops below it.
    pub fn value(&self, episode: usize) -> f64 {
        (self.start * self.decay.powi(episode as i32)).max(self.floor).min(1.0)
    }
}

impl Default for EpsilonSchedule {
    /// Explores fully for roughly the first half of a 200-episode run
    /// (start > 1 holds epsilon at 1 until the decayed value crosses it),
    /// then decays toward the floor.
    fn default() -> Self {
        Self { start: 125.0, decay: 0.95, floor: 0.01 }
    }
}

/// Full training loop: `episodes` reset-to-end episodes on a zero-initialized
/// table. Returns one trace per episode.
pub fn train(
    env: &mut dyn Environment,
    hp: Hyperparams,
    episodes: usize,
    schedule: EpsilonSchedule,
    rng: &mut dyn RngCore,
) -> Result<Vec<EpisodeTrace>, QlearnError> {
    train_with_table(env, hp, episodes, schedule, rng).map(|(traces, _)| traces)
}

/// As [`train`], also returning the learned table.
pub fn train_with_table(
    env: &mut dyn Environment,
    hp: Hyperparams,
    episodes: usize,
    schedule: EpsilonSchedule,
    rng: &mut dyn RngCore,
) -> Result<(Vec<EpisodeTrace>, QTable), QlearnError> {
    if episodes < 4 {
        return Err(QlearnError::TooFewEpisodes(episodes));
    }
    let mut q = QTable::zeros(env.state_count(), env.action_count());
    let mut traces = Vec::with_capacity(episodes);
    for episode in 0..episodes {
        let epsilon = schedule.value(episode);
        let mut state = env.reset(rng);
        let mut total_reward = 0.0;
        let mut abs_delta_sum = 0.0;
        let mut steps = 0usize;
        loop {
            let action = select_action(&q, state, epsilon, rng);
            let t = env.step(action, rng)?;
            let delta = td_error(&q, state, action, t.reward, t.next_state, t.terminated, hp.gamma);
            update(&mut q, state, action, hp.alpha, delta);
            total_reward += t.reward;
            abs_delta_sum += delta.abs();
            steps += 1;
            state = t.next_state;
            if t.terminated || t.truncated {
                break;
            }
        }
        traces.push(EpisodeTrace {
            total_reward,
            td_error_mag: abs_delta_sum / steps as f64,
            steps,
        });
    }
    Ok((traces, q))
}

/// Mean total reward of `episodes` greedy rollouts (epsilon = 0).
pub fn evaluate_greedy(
    env: &mut dyn Environment,
    q: &QTable,
    episodes: usize,
    rng: &mut dyn RngCore,
) -> Result<f64, QlearnError> {
    let mut total = 0.0;
    for _ in 0..episodes {
        let mut state = env.reset(rng);
        loop {
            let t = env.step(q.argmax(state), rng)?;
            total += t.reward;
            state = t.next_state;
            if t.terminated || t.truncated {
                break;
            }
        }
    }
    Ok(total / episodes as f64)
}
