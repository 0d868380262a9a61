//! Pole balancing on a moving cart, discretized for tabular learning.

use rand::{Rng, RngCore};

use super::{EnvError, Environment, Transition};

const GRAVITY: f64 = 9.8;
const MASS_CART: f64 = 1.0;
const MASS_POLE: f64 = 0.1;
const TOTAL_MASS: f64 = MASS_CART + MASS_POLE;
const HALF_POLE_LENGTH: f64 = 0.5;
const POLE_MASS_LENGTH: f64 = MASS_POLE * HALF_POLE_LENGTH;
const FORCE_MAG: f64 = 10.0;
const TAU: f64 = 0.02;

pub const X_THRESHOLD: f64 = 2.4;
pub const THETA_THRESHOLD: f64 = 0.2095; // ~12 degrees

/// Maps a continuous observation to a single state index by uniform
/// bucketing per dimension and mixed-radix encoding.
#[derive(Debug, Clone)]
pub struct Discretizer {
    bins: Vec<usize>,
    bounds: Vec<(f64, f64)>,
}

impl Discretizer {
    pub fn new(bins: Vec<usize>, bounds: Vec<(f64, f64)>) -> Result<Self, EnvError> {
        if bins.len() != bounds.len() {
            return Err(EnvError::InvalidConfig("bins/bounds length mismatch".into()));
        }
        if bins.iter().any(|&b| b < 1) {
            return Err(EnvError::InvalidConfig("every bin count must be >= 1".into()));
        }
        if bounds.iter().any(|(lo, hi)| !(lo < hi) || !lo.is_finite() || !hi.is_finite()) {
            return Err(EnvError::InvalidConfig("bounds must be finite with low < high".into()));
        }
        Ok(Self { bins, bounds })
    }

    pub fn state_count(&self) -> usize {
        self.bins.iter().product()
    }

    /// Total on any input: values outside the bounds are clipped first.
    pub fn index(&self, observation: &[f64]) -> usize {
        debug_assert_eq!(observation.len(), self.bins.len());
        let mut idx = 0usize;
        for ((&v, &b), &(lo, hi)) in observation.iter().zip(&self.bins).zip(&self.bounds) {
            let v = v.clamp(lo, hi);
            let bucket = (((v - lo) / (hi - lo)) * b as f64) as usize;
            idx = idx * b + bucket.min(b - 1);
        }
        idx
    }
}

#[derive(Debug, Clone)]
pub struct CartPoleEnv {
    state: [f64; 4], // x, x_dot, theta, theta_dot
    discretizer: Discretizer,
    step_cap: usize,
    steps: usize,
    done: bool,
}

impl CartPoleEnv {
    pub const DEFAULT_BINS: [usize; 4] = [6, 6, 12, 12];
    pub const DEFAULT_BOUNDS: [(f64, f64); 4] = [
        (-X_THRESHOLD, X_THRESHOLD),
        (-3.0, 3.0),
        (-THETA_THRESHOLD, THETA_THRESHOLD),
        (-3.5, 3.5),
    ];

    pub fn new(bins: Vec<usize>, bounds: Vec<(f64, f64)>, step_cap: usize) -> Result<Self, EnvError> {
        if step_cap == 0 {
            return Err(EnvError::InvalidConfig("step_cap must be positive".into()));
        }
        if bins.len() != 4 {
            return Err(EnvError::InvalidConfig("cart-pole needs 4 bin counts".into()));
        }
        Ok(Self {
            state: [0.0; 4],
            discretizer: Discretizer::new(bins, bounds)?,
            step_cap,
            steps: 0,
            done: true,
        })
    }

    /// Default bins (6,6,12,12), default bounds, 500-step cap.
    pub fn standard() -> Self {
        Self::new(
            Self::DEFAULT_BINS.to_vec(),
            Self::DEFAULT_BOUNDS.to_vec(),
            500,
        )
        .expect("default config is valid")
    }

    pub fn observation(&self) -> [f64; 4] {
        self.state
    }

    pub fn discretizer(&self) -> &Discretizer {
        &self.discretizer
    }

    #[cfg(test)]
    pub(crate) fn set_observation(&mut self, obs: [f64; 4]) {
        self.state = obs;
        self.done = false;
    }

    /// One Euler step of the classic cart-pole dynamics.
    fn integrate(&mut self, action: usize) {
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let [x, x_dot, theta, theta_dot] = self.state;
        let (sin_t, cos_t) = theta.sin_cos();
        let temp = (force + POLE_MASS_LENGTH * theta_dot * theta_dot * sin_t) / TOTAL_MASS;
        let theta_acc = (GRAVITY * sin_t - cos_t * temp)
            / (HALF_POLE_LENGTH * (4.0 / 3.0 - MASS_POLE * cos_t * cos_t / TOTAL_MASS));
        let x_acc = temp - POLE_MASS_LENGTH * theta_acc * cos_t / TOTAL_MASS;
        self.state = [
            x + TAU * x_dot,
            x_dot + TAU * x_acc,
            theta + TAU * theta_dot,
            theta_dot + TAU * theta_acc,
        ];
    }
}

impl Environment for CartPoleEnv {
    fn state_count(&self) -> usize {
        self.discretizer.state_count()
    }

    fn action_count(&self) -> usize {
        2
    }

    fn step_cap(&self) -> usize {
        self.step_cap
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> usize {
        for v in &mut self.state {
            *v = rng.random_range(-0.05..=0.05);
        }
        self.steps = 0;
        self.done = false;
        self.discretizer.index(&self.state)
    }

    fn step(&mut self, action: usize, _rng: &mut dyn RngCore) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::EpisodeFinished);
        }
        if action >= 2 {
            return Err(EnvError::InvalidAction { action, action_count: 2 });
        }
        self.integrate(action);
        self.steps += 1;
        let [x, _, theta, _] = self.state;
        let terminated = x.abs() > X_THRESHOLD || theta.abs() > THETA_THRESHOLD;
        let truncated = !terminated && self.steps >= self.step_cap;
        self.done = terminated || truncated;
        Ok(Transition {
            next_state: self.discretizer.index(&self.state),
            reward: 1.0,
            terminated,
            truncated,
        })
    }
}
