//! Shared types for the boxed-minimization interface every optimizer exposes.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type ObjectiveError = Box<dyn std::error::Error + Send + Sync + 'static>;

#[derive(Debug, Error)]
pub enum OptError {
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("population size must be >= 1")]
    EmptyPopulation,
    #[error("objective evaluation failed (iteration {iteration}, agent {agent}): {source}")]
    Objective {
        iteration: usize,
        agent: usize,
        source: ObjectiveError,
    },
}

/// Where in the run an evaluation happens; used to derive deterministic
/// per-evaluation RNG streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalCtx {
    pub iteration: usize,
    pub agent: usize,
}

/// A scalar objective over a bounded box; lower is better.
pub trait Objective: Sync {
    fn eval(&self, x: &[f64], ctx: EvalCtx) -> Result<f64, ObjectiveError>;
}

impl<F> Objective for F
where
    F: Fn(&[f64], EvalCtx) -> Result<f64, ObjectiveError> + Sync,
{
    fn eval(&self, x: &[f64], ctx: EvalCtx) -> Result<f64, ObjectiveError> {
        self(x, ctx)
    }
}

/// Per-dimension closed intervals forming the search box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds(Vec<(f64, f64)>);

impl Bounds {
    pub fn new(pairs: Vec<(f64, f64)>) -> Result<Self, OptError> {
        if pairs.is_empty() {
            return Err(OptError::InvalidBounds("empty bounds".into()));
        }
        for &(lo, hi) in &pairs {
            if !lo.is_finite() || !hi.is_finite() || !(lo < hi) {
                return Err(OptError::InvalidBounds(format!(
                    "need finite low < high, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Self(pairs))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn low(&self, d: usize) -> f64 {
        self.0[d].0
    }

    pub fn high(&self, d: usize) -> f64 {
        self.0[d].1
    }

    pub fn width(&self, d: usize) -> f64 {
        self.0[d].1 - self.0[d].0
    }

    pub fn clamp(&self, x: &mut [f64]) {
        for (v, &(lo, hi)) in x.iter_mut().zip(&self.0) {
            *v = v.clamp(lo, hi);
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(&self.0).all(|(v, &(lo, hi))| (lo..=hi).contains(v))
    }

    pub fn sample(&self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.0.iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect()
    }
}

/// One agent: a position in the box plus its cached objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub position: Vec<f64>,
    pub fitness: f64,
}

impl Candidate {
    pub fn unevaluated(position: Vec<f64>) -> Self {
        Self { position, fitness: f64::INFINITY }
    }
}

/// Optimizer output: the best candidate plus the best-so-far fitness after
/// the initial evaluation and after each iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct OptRun {
    pub best: Candidate,
    pub history: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seed::stream;

    #[test]
    fn bounds_validation() {
        assert!(Bounds::new(vec![]).is_err());
        assert!(Bounds::new(vec![(1.0, 1.0)]).is_err());
        assert!(Bounds::new(vec![(2.0, 1.0)]).is_err());
        assert!(Bounds::new(vec![(0.0, f64::INFINITY)]).is_err());
        assert!(Bounds::new(vec![(0.01, 1.0), (0.0, 1.0)]).is_ok());
    }

    #[test]
    fn clamp_and_sample_stay_inside() {
        let b = Bounds::new(vec![(-5.0, 5.0), (0.0, 1.0)]).unwrap();
        let mut x = vec![-9.0, 3.0];
        b.clamp(&mut x);
        assert_eq!(x, vec![-5.0, 1.0]);
        let mut rng = stream(2, &[]);
        for _ in 0..100 {
            assert!(b.contains(&b.sample(&mut rng)));
        }
    }
}
