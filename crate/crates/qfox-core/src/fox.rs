//! The FOX optimization algorithm: a fox population alternating sound-distance
//! exploitation jumps and best-scaled random-walk exploration.

use rayon::prelude::*;

use rand::{Rng, RngCore};

use crate::opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
use crate::seed::stream;

/// Jump direction weights; which one applies is drawn per move.
pub const C1: f64 = 0.180;
pub const C2: f64 = 0.820;

/// Floor applied to the per-dimension time draw before dividing.
const T_FLOOR: f64 = 1e-12;

const INIT_TAG: u64 = 0x111;
const MOVE_TAG: u64 = 0x222;

/// Jump height from the average sound travel time: `0.5 * 9.81 * t^2`.
pub fn jump_height(t_avg: f64) -> f64 {
    0.5 * 9.81 * t_avg * t_avg
}

/// Distance from a fox to its prey: sound speed times travel time, halved.
pub fn prey_distance(best_position: &[f64], t: &[f64]) -> Vec<f64> {
    best_position
        .iter()
        .zip(t)
        .map(|(&b, &ti)| {
            let ti = ti.max(T_FLOOR);
            let speed = b / ti;
            speed * ti * 0.5
        })
        .collect()
}

/// Exploration scale: decays linearly from 2 at the first iteration to 0 at
/// the last.
pub fn exploration_coefficient(iter: usize, max_iter: usize) -> f64 {
    if max_iter == 0 {
        return 0.0;
    }
    2.0 * (1.0 - iter as f64 / max_iter as f64)
}

/// Counts of which branch each move took.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BranchStats {
    pub exploit: usize,
    pub explore: usize,
}

struct MoveOutcome {
    position: Vec<f64>,
    /// Mean of the time draws when the move exploited.
    exploit_tt: Option<f64>,
}

/// One position update. Draws the branch selector `r`; exploitation jumps
/// toward the prey, exploration random-walks around the best position.
/// The caller clamps the result to the bounds.
fn fox_move(
    best_position: &[f64],
    iter: usize,
    max_iter: usize,
    min_tt: f64,
    rng: &mut dyn RngCore,
) -> MoveOutcome {
    let dim = best_position.len();
    let r: f64 = rng.random();
    if r >= 0.5 {
        let t: Vec<f64> = (0..dim).map(|_| rng.random()).collect();
        let dfp = prey_distance(best_position, &t);
        let t_avg = t.iter().sum::<f64>() / dim as f64;
        let jump = jump_height(t_avg);
        let p: f64 = rng.random();
        let c = if p > 0.18 { C1 } else { C2 };
        MoveOutcome {
            position: dfp.iter().map(|&d| d * jump * c).collect(),
            exploit_tt: Some(t_avg),
        }
    } else {
        let a = exploration_coefficient(iter, max_iter);
        MoveOutcome {
            position: best_position
                .iter()
                .map(|&b| b * rng.random::<f64>() * min_tt * a)
                .collect(),
            exploit_tt: None,
        }
    }
}

/// Population state across iterations.
pub struct FoxState {
    population: Vec<Candidate>,
    best: Candidate,
    min_tt: f64,
    iter: usize,
    max_iter: usize,
    bounds: Bounds,
    seed: u64,
    stats: BranchStats,
    evaluated: bool,
}

impl FoxState {
    /// Uniformly sample `g` agents inside the box. Fitness stays unset until
    /// [`FoxState::evaluate_initial`].
    pub fn init(bounds: Bounds, g: usize, max_iter: usize, seed: u64) -> Result<Self, OptError> {
        if g == 0 {
            return Err(OptError::EmptyPopulation);
        }
        let mut rng = stream(seed, &[INIT_TAG]);
        let population: Vec<Candidate> =
            (0..g).map(|_| Candidate::unevaluated(bounds.sample(&mut rng))).collect();
        let best = population[0].clone();
        Ok(Self {
            population,
            best,
            min_tt: f64::INFINITY,
            iter: 0,
            max_iter,
            bounds,
            seed,
            stats: BranchStats::default(),
            evaluated: false,
        })
    }

    pub fn best(&self) -> &Candidate {
        &self.best
    }

    pub fn iteration(&self) -> usize {
        self.iter
    }

    pub fn population(&self) -> &[Candidate] {
        &self.population
    }

    pub fn branch_stats(&self) -> BranchStats {
        self.stats
    }

    /// Evaluate the initial population and seed the global best.
    pub fn evaluate_initial<O: Objective>(&mut self, objective: &O) -> Result<(), OptError> {
        let fits: Result<Vec<f64>, OptError> = self
            .population
            .par_iter()
            .enumerate()
            .map(|(agent, c)| {
                let ctx = EvalCtx { iteration: 0, agent };
                objective.eval(&c.position, ctx).map_err(|source| OptError::Objective {
                    iteration: 0,
                    agent,
                    source,
                })
            })
            .collect();
        for (c, f) in self.population.iter_mut().zip(fits?) {
            c.fitness = f;
        }
        let best_idx = argmin(&self.population);
        self.best = self.population[best_idx].clone();
        self.evaluated = true;
        Ok(())
    }

    /// Move every agent, clamp, evaluate, update the global best (strict
    /// improvement only) and the running minimum time average.
    pub fn step<O: Objective>(&mut self, objective: &O) -> Result<(), OptError> {
        assert!(self.evaluated, "call evaluate_initial before step");
        // First-iteration fallback: no exploiting agent has set min_tt yet.
        let min_tt = if self.min_tt.is_finite() { self.min_tt } else { 1.0 };
        let iteration = self.iter + 1;
        let moved: Result<Vec<(Candidate, Option<f64>)>, OptError> = (0..self.population.len())
            .into_par_iter()
            .map(|agent| {
                let mut rng = stream(self.seed, &[MOVE_TAG, self.iter as u64, agent as u64]);
                let outcome =
                    fox_move(&self.best.position, self.iter, self.max_iter, min_tt, &mut rng);
                let mut position = outcome.position;
                self.bounds.clamp(&mut position);
                let ctx = EvalCtx { iteration, agent };
                let fitness =
                    objective.eval(&position, ctx).map_err(|source| OptError::Objective {
                        iteration,
                        agent,
                        source,
                    })?;
                Ok((Candidate { position, fitness }, outcome.exploit_tt))
            })
            .collect();
        let moved = moved?;
        let mut iter_min_tt = f64::INFINITY;
        for (agent, (candidate, tt)) in moved.into_iter().enumerate() {
            match tt {
                Some(t) => {
                    self.stats.exploit += 1;
                    iter_min_tt = iter_min_tt.min(t);
                }
                None => self.stats.explore += 1,
            }
            if candidate.fitness < self.best.fitness {
                self.best = candidate.clone();
            }
            self.population[agent] = candidate;
        }
        self.min_tt = self.min_tt.min(iter_min_tt);
        self.iter += 1;
        Ok(())
    }
}

pub(crate) fn argmin(population: &[Candidate]) -> usize {
    let mut best = 0;
    for (i, c) in population.iter().enumerate().skip(1) {
        if c.fitness < population[best].fitness {
            best = i;
        }
    }
    best
}

/// Full run: init, evaluate, `max_iter` steps. The history has
/// `max_iter + 1` entries.
pub fn optimize<O: Objective>(
    objective: &O,
    bounds: &Bounds,
    g: usize,
    max_iter: usize,
    seed: u64,
) -> Result<OptRun, OptError> {
    let mut state = FoxState::init(bounds.clone(), g, max_iter, seed)?;
    state.evaluate_initial(objective)?;
    let mut history = Vec::with_capacity(max_iter + 1);
    history.push(state.best.fitness);
    for _ in 0..max_iter {
        state.step(objective)?;
        history.push(state.best.fitness);
    }
    Ok(OptRun { best: state.best, history })
}
