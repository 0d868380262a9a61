//! Comparison optimizers behind the same boxed-minimization contract as FOX,
//! so cross-method comparisons are budget-fair.

mod ba;
mod ga;
mod pso;
mod random;

pub use ba::{ba_optimize, BaParams};
pub use ga::{ga_optimize, GaParams};
pub use pso::{pso_optimize, PsoParams};
pub use random::random_search;

use serde::{Deserialize, Serialize};

use crate::fox;
use crate::opt::{Bounds, Objective, OptError, OptRun};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Fox,
    Pso,
    Ga,
    Ba,
    Random,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Fox, Algorithm::Pso, Algorithm::Ga, Algorithm::Ba, Algorithm::Random];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Fox => "FOX",
            Algorithm::Pso => "PSO",
            Algorithm::Ga => "GA",
            Algorithm::Ba => "BA",
            Algorithm::Random => "Random",
        }
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "fox" => Ok(Algorithm::Fox),
            "pso" => Ok(Algorithm::Pso),
            "ga" => Ok(Algorithm::Ga),
            "ba" => Ok(Algorithm::Ba),
            "random" => Ok(Algorithm::Random),
            other => Err(format!("unknown optimizer '{other}'")),
        }
    }
}

/// Which optimizer to run and with what budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: Algorithm,
    /// Population size.
    pub g: usize,
    pub max_iter: usize,
    /// Sample budget for random search; when unset it is matched to
    /// `g * (max_iter + 1)` for evaluation-count parity.
    pub random_budget: Option<usize>,
}

impl OptimizerConfig {
    pub fn new(algorithm: Algorithm, g: usize, max_iter: usize) -> Self {
        Self { algorithm, g, max_iter, random_budget: None }
    }

    /// Total objective evaluations the configured run performs.
    pub fn evaluation_budget(&self) -> usize {
        match self.algorithm {
            Algorithm::Random => self.random_budget.unwrap_or(self.g * (self.max_iter + 1)),
            _ => self.g * (self.max_iter + 1),
        }
    }

    pub fn run<O: Objective>(
        &self,
        objective: &O,
        bounds: &Bounds,
        seed: u64,
    ) -> Result<OptRun, OptError> {
        match self.algorithm {
            Algorithm::Fox => fox::optimize(objective, bounds, self.g, self.max_iter, seed),
            Algorithm::Pso => {
                pso_optimize(objective, bounds, self.g, self.max_iter, seed, &PsoParams::default())
            }
            Algorithm::Ga => {
                ga_optimize(objective, bounds, self.g, self.max_iter, seed, &GaParams::default())
            }
            Algorithm::Ba => {
                ba_optimize(objective, bounds, self.g, self.max_iter, seed, &BaParams::default())
            }
            Algorithm::Random => {
                random_search(objective, bounds, self.evaluation_budget(), seed)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::{EvalCtx, ObjectiveError};
    use std::sync::atomic::{AtomicUsize, Ordering};

    pub(crate) fn sphere(x: &[f64], _: EvalCtx) -> Result<f64, ObjectiveError> {
        Ok(x.iter().map(|v| v * v).sum())
    }

    fn bounds2() -> Bounds {
        Bounds::new(vec![(-5.0, 5.0), (-5.0, 5.0)]).unwrap()
    }

    #[test]
    fn equal_evaluation_budgets() {
        for algo in Algorithm::ALL {
            let config = OptimizerConfig::new(algo, 8, 12);
            let count = AtomicUsize::new(0);
            let counting = |x: &[f64], ctx: EvalCtx| {
                count.fetch_add(1, Ordering::Relaxed);
                sphere(x, ctx)
            };
            config.run(&counting, &bounds2(), 3).unwrap();
            assert_eq!(
                count.load(Ordering::Relaxed),
                8 * 13,
                "{} evaluation count off budget",
                algo.name()
            );
        }
    }

    #[test]
    fn all_optimizers_monotone_and_reproducible() {
        for algo in Algorithm::ALL {
            let config = OptimizerConfig::new(algo, 10, 30);
            let a = config.run(&sphere, &bounds2(), 11).unwrap();
            let b = config.run(&sphere, &bounds2(), 11).unwrap();
            assert_eq!(a.best, b.best, "{} not reproducible", algo.name());
            assert_eq!(a.history, b.history);
            for w in a.history.windows(2) {
                assert!(w[1] <= w[0], "{} history not monotone", algo.name());
            }
            assert!(bounds2().contains(&a.best.position));
        }
    }

    #[test]
    fn sphere_convergence_all_population_methods() {
        for algo in [Algorithm::Pso, Algorithm::Ga, Algorithm::Ba] {
            let config = OptimizerConfig::new(algo, 30, 100);
            let mut bests: Vec<f64> =
                (0..10).map(|s| config.run(&sphere, &bounds2(), s).unwrap().best.fitness).collect();
            bests.sort_by(|a, b| a.total_cmp(b));
            let median = (bests[4] + bests[5]) / 2.0;
            assert!(median <= 1e-2, "{} median sphere best {median} > 1e-2", algo.name());
        }
    }

    #[test]
    fn constant_objective_never_improves() {
        let flat = |_: &[f64], _: EvalCtx| -> Result<f64, ObjectiveError> { Ok(1.5) };
        for algo in Algorithm::ALL {
            let run = OptimizerConfig::new(algo, 6, 10).run(&flat, &bounds2(), 0).unwrap();
            assert!(run.history.iter().all(|&f| f == 1.5));
        }
    }

    #[test]
    fn algorithm_parsing() {
        assert_eq!("fox".parse::<Algorithm>().unwrap(), Algorithm::Fox);
        assert_eq!("RANDOM".parse::<Algorithm>().unwrap(), Algorithm::Random);
        assert!("cmaes".parse::<Algorithm>().is_err());
    }
}
