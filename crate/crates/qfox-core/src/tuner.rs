//! The tuner: Q-learning training wrapped as a boxed objective over
//! (alpha, gamma), the reward-prioritized composite fitness, and the
//! runs x iterations x agents orchestration.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::OptimizerConfig;
use crate::envs::{CartPoleEnv, EnvError, Environment, FrozenLakeEnv};
use crate::opt::{Bounds, EvalCtx, Objective, ObjectiveError, OptError};
use crate::qlearn::{self, EpisodeTrace, EpsilonSchedule, Hyperparams, QlearnError};
use crate::seed::{mix, stream};

const OPT_TAG: u64 = 0x70_01;
const EVAL_TAG: u64 = 0x70_02;
const RETRAIN_TAG: u64 = 0x70_03;
const GREEDY_TAG: u64 = 0x70_04;

#[derive(Debug, Error)]
pub enum TuneError {
    #[error("trace list length {got} does not match episode count {expected}")]
    TraceLengthMismatch { got: usize, expected: usize },
    #[error("fitness needs at least 4 episodes, got {0}")]
    TooFewEpisodes(usize),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Qlearn(#[from] QlearnError),
    #[error(transparent)]
    Opt(#[from] OptError),
    #[error("all {runs} tuning runs failed; first error: {first}")]
    AllRunsFailed { runs: usize, first: Box<TuneError> },
}

/// Which control task to tune on, with its environment parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TaskSpec {
    FrozenLake {
        map: Vec<String>,
        slippery: bool,
        step_cap: usize,
    },
    CartPole {
        bins: Vec<usize>,
        bounds: Vec<(f64, f64)>,
        step_cap: usize,
    },
}

impl TaskSpec {
    pub fn frozen_lake_default() -> Self {
        TaskSpec::FrozenLake {
            map: crate::envs::FrozenLakeEnv::standard_map(),
            slippery: false,
            step_cap: 200,
        }
    }

    pub fn cart_pole_default() -> Self {
        TaskSpec::CartPole {
            bins: CartPoleEnv::DEFAULT_BINS.to_vec(),
            bounds: CartPoleEnv::DEFAULT_BOUNDS.to_vec(),
            step_cap: 500,
        }
    }

    pub fn build_env(&self) -> Result<Box<dyn Environment>, EnvError> {
        match self {
            TaskSpec::FrozenLake { map, slippery, step_cap } => {
                Ok(Box::new(FrozenLakeEnv::new(map, *slippery, *step_cap)?))
            }
            TaskSpec::CartPole { bins, bounds, step_cap } => {
                Ok(Box::new(CartPoleEnv::new(bins.clone(), bounds.clone(), *step_cap)?))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            TaskSpec::FrozenLake { .. } => "frozenlake",
            TaskSpec::CartPole { .. } => "cartpole",
        }
    }
}

/// Composite fitness over the last quarter of episodes:
/// `sum_i (2 * R_i - e_i) * (1 / st_i)` for `i` from `episodes - episodes/4`
/// (integer division) to the final episode. Larger is better.
pub fn fitness(traces: &[EpisodeTrace], episodes: usize) -> Result<f64, TuneError> {
    if episodes < 4 {
        return Err(TuneError::TooFewEpisodes(episodes));
    }
    if traces.len() != episodes {
        return Err(TuneError::TraceLengthMismatch { got: traces.len(), expected: episodes });
    }
    let start = episodes - episodes / 4;
    let mut sum = 0.0;
    for t in &traces[start..] {
        sum += (2.0 * t.total_reward - t.td_error_mag) * (1.0 / t.steps as f64);
    }
    Ok(sum)
}

/// One candidate evaluation: training traces, their fitness, and the
/// last-quarter summary statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub fitness: f64,
    pub mean_reward_last_quarter: f64,
    pub mean_error_last_quarter: f64,
    pub mean_steps_last_quarter: f64,
    pub traces: Vec<EpisodeTrace>,
}

/// Train once with `hp` on a freshly built environment and score the traces.
pub fn evaluate_candidate(
    hp: Hyperparams,
    task: &TaskSpec,
    episodes: usize,
    schedule: EpsilonSchedule,
    seed: u64,
) -> Result<FitnessReport, TuneError> {
    let mut env = task.build_env()?;
    let mut rng = stream(seed, &[]);
    let traces = qlearn::train(env.as_mut(), hp, episodes, schedule, &mut rng)?;
    report_from_traces(traces, episodes)
}

fn report_from_traces(traces: Vec<EpisodeTrace>, episodes: usize) -> Result<FitnessReport, TuneError> {
    let fit = fitness(&traces, episodes)?;
    let window = &traces[episodes - episodes / 4..];
    let n = window.len() as f64;
    Ok(FitnessReport {
        fitness: fit,
        mean_reward_last_quarter: window.iter().map(|t| t.total_reward).sum::<f64>() / n,
        mean_error_last_quarter: window.iter().map(|t| t.td_error_mag).sum::<f64>() / n,
        mean_steps_last_quarter: window.iter().map(|t| t.steps as f64).sum::<f64>() / n,
        traces,
    })
}

/// Tuning protocol knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct TuneSettings {
    pub optimizer: OptimizerConfig,
    pub n_runs: usize,
    pub episodes: usize,
    /// Training runs averaged per candidate evaluation.
    pub eval_repeats: usize,
    pub schedule: EpsilonSchedule,
    pub bounds: Bounds,
}

impl TuneSettings {
    /// The search box for (alpha, gamma).
    pub fn default_bounds() -> Bounds {
        Bounds::new(vec![
            (qlearn::ALPHA_MIN, qlearn::ALPHA_MAX),
            (qlearn::GAMMA_MIN, qlearn::GAMMA_MAX),
        ])
        .expect("static bounds are valid")
    }

    pub fn new(optimizer: OptimizerConfig) -> Self {
        Self {
            optimizer,
            n_runs: 10,
            episodes: 200,
            eval_repeats: 1,
            schedule: EpsilonSchedule::default(),
            bounds: Self::default_bounds(),
        }
    }
}

/// Tuning output: best pair, its fitness (larger is better), per-run
/// convergence histories, and the reward curve of a final retraining run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_hp: Hyperparams,
    pub best_fitness: f64,
    /// Best-so-far fitness per iteration, one history per run.
    pub convergence: Vec<Vec<f64>>,
    /// Per-episode total rewards of the final retraining run with `best_hp`.
    pub reward_curve: Vec<f64>,
    /// Mean last-quarter reward of the retraining run.
    pub mean_reward_last_quarter: f64,
    /// Mean reward of 100 greedy evaluation episodes after retraining.
    pub greedy_reward: f64,
    pub run_count: usize,
    pub wall_time: f64,
}

/// The minimizing objective handed to the optimizers: negated fitness, with
/// environment seeds derived from (master seed, run, iteration, agent).
struct TuneObjective<'a> {
    task: &'a TaskSpec,
    episodes: usize,
    schedule: EpsilonSchedule,
    eval_repeats: usize,
    master_seed: u64,
    run: usize,
}

impl Objective for TuneObjective<'_> {
    fn eval(&self, x: &[f64], ctx: EvalCtx) -> Result<f64, ObjectiveError> {
        let hp = Hyperparams::new(x[0], x[1]).map_err(Box::new)?;
        let mut total = 0.0;
        for rep in 0..self.eval_repeats.max(1) {
            let seed = mix(
                self.master_seed,
                &[EVAL_TAG, self.run as u64, ctx.iteration as u64, ctx.agent as u64, rep as u64],
            );
            let report = evaluate_candidate(hp, self.task, self.episodes, self.schedule, seed)
                .map_err(Box::new)?;
            total += report.fitness;
        }
        Ok(-(total / self.eval_repeats.max(1) as f64))
    }
}

/// Full tuning protocol: `n_runs` independent optimizer runs, best-of-runs
/// selection, then one retraining run with the winning pair.
pub fn tune(settings: &TuneSettings, task: &TaskSpec, master_seed: u64) -> Result<TuneResult, TuneError> {
    assert!(settings.n_runs >= 1, "n_runs must be >= 1");
    let started = Instant::now();
    let mut convergence = Vec::with_capacity(settings.n_runs);
    let mut best: Option<crate::opt::Candidate> = None;
    let mut first_error: Option<TuneError> = None;
    let mut failures = 0usize;
    for run in 0..settings.n_runs {
        let objective = TuneObjective {
            task,
            episodes: settings.episodes,
            schedule: settings.schedule,
            eval_repeats: settings.eval_repeats,
            master_seed,
            run,
        };
        let opt_seed = mix(master_seed, &[OPT_TAG, run as u64]);
        match settings.optimizer.run(&objective, &settings.bounds, opt_seed) {
            Ok(opt_run) => {
                convergence.push(opt_run.history.iter().map(|f| -f).collect());
                if best.as_ref().is_none_or(|b| opt_run.best.fitness < b.fitness) {
                    best = Some(opt_run.best);
                }
            }
            Err(e) => {
                failures += 1;
                if first_error.is_none() {
                    first_error = Some(e.into());
                }
            }
        }
    }
    let Some(best) = best else {
        return Err(TuneError::AllRunsFailed {
            runs: failures,
            first: Box::new(first_error.expect("at least one failure recorded")),
        });
    };
    let best_hp = Hyperparams::new(best.position[0], best.position[1])?;

    // Retrain once with the winner to produce the reward curve and the
    // greedy-policy evaluation.
    let retrain_seed = mix(master_seed, &[RETRAIN_TAG]);
    let mut env = task.build_env()?;
    let mut rng = stream(retrain_seed, &[]);
    let (traces, q) =
        qlearn::train_with_table(env.as_mut(), best_hp, settings.episodes, settings.schedule, &mut rng)?;
    let report = report_from_traces(traces, settings.episodes)?;
    let mut greedy_rng = stream(master_seed, &[GREEDY_TAG]);
    let greedy_reward = qlearn::evaluate_greedy(env.as_mut(), &q, 100, &mut greedy_rng)?;

    Ok(TuneResult {
        best_hp,
        best_fitness: -best.fitness,
        convergence,
        reward_curve: report.traces.iter().map(|t| t.total_reward).collect(),
        mean_reward_last_quarter: report.mean_reward_last_quarter,
        greedy_reward,
        run_count: settings.n_runs,
        wall_time: started.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::Algorithm;

    fn trace(r: f64, e: f64, st: usize) -> EpisodeTrace {
        EpisodeTrace { total_reward: r, td_error_mag: e, steps: st }
    }

    #[test]
    fn fitness_hand_value() {
        // 200 episodes, last 50 all (R=1, e=0, st=10): 50 * (2 - 0) / 10 = 10
        let mut traces = vec![trace(0.0, 5.0, 3); 150];
        traces.extend(vec![trace(1.0, 0.0, 10); 50]);
        assert!((fitness(&traces, 200).unwrap() - 10.0).abs() < 1e-12);
    }

    #[test]
    fn fitness_zero_numerator() {
        let traces = vec![trace(0.0, 0.0, 7); 8];
        assert_eq!(fitness(&traces, 8).unwrap(), 0.0);
    }

    #[test]
    fn fitness_window_boundary() {
        let base = vec![trace(0.5, 0.1, 4); 200];
        let f0 = fitness(&base, 200).unwrap();
        // index 149 is outside the window, 150 is inside
        let mut outside = base.clone();
        outside[149] = trace(9.0, 9.0, 1);
        assert_eq!(fitness(&outside, 200).unwrap(), f0);
        let mut inside = base;
        inside[150] = trace(9.0, 9.0, 1);
        assert_ne!(fitness(&inside, 200).unwrap(), f0);
    }

    #[test]
    fn fitness_rejects_bad_inputs() {
        let traces = vec![trace(0.0, 0.0, 1); 10];
        assert!(matches!(
            fitness(&traces, 12),
            Err(TuneError::TraceLengthMismatch { got: 10, expected: 12 })
        ));
        assert!(matches!(fitness(&traces[..3], 3), Err(TuneError::TooFewEpisodes(3))));
    }

    #[test]
    fn evaluate_candidate_deterministic_and_self_consistent() {
        let hp = Hyperparams::new(0.7, 0.95).unwrap();
        let task = TaskSpec::frozen_lake_default();
        let a = evaluate_candidate(hp, &task, 200, EpsilonSchedule::default(), 21).unwrap();
        let b = evaluate_candidate(hp, &task, 200, EpsilonSchedule::default(), 21).unwrap();
        assert_eq!(a, b);
        // fitness recomputable from the returned traces
        assert_eq!(a.fitness, fitness(&a.traces, 200).unwrap());
    }

    #[test]
    fn higher_alpha_beats_tiny_alpha_on_frozen_lake() {
        let task = TaskSpec::frozen_lake_default();
        let sched = EpsilonSchedule::default();
        let low = Hyperparams::new(0.01, 0.97).unwrap();
        let high = Hyperparams::new(0.74, 0.97).unwrap();
        let mut wins = 0;
        for seed in 0..10 {
            let f_low = evaluate_candidate(low, &task, 200, sched, seed).unwrap().fitness;
            let f_high = evaluate_candidate(high, &task, 200, sched, seed).unwrap().fitness;
            if f_high >= f_low {
                wins += 1;
            }
        }
        assert!(wins >= 8, "high alpha won only {wins}/10 seeds");
    }

    #[test]
    fn tune_degenerate_budget() {
        let mut settings =
            TuneSettings::new(OptimizerConfig::new(Algorithm::Fox, 5, 0));
        settings.n_runs = 1;
        settings.episodes = 20;
        let task = TaskSpec::frozen_lake_default();
        let result = tune(&settings, &task, 3).unwrap();
        assert_eq!(result.convergence.len(), 1);
        assert_eq!(result.convergence[0].len(), 1);
        assert_eq!(result.reward_curve.len(), 20);
        assert_eq!(result.run_count, 1);
    }

    #[test]
    fn best_fitness_is_max_over_run_histories() {
        let mut settings =
            TuneSettings::new(OptimizerConfig::new(Algorithm::Random, 4, 2));
        settings.n_runs = 3;
        settings.episodes = 40;
        let task = TaskSpec::frozen_lake_default();
        let result = tune(&settings, &task, 5).unwrap();
        let max_seen = result
            .convergence
            .iter()
            .flat_map(|h| h.iter().copied())
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(result.best_fitness, max_seen);
    }

    #[test]
    fn tune_is_deterministic_modulo_wall_time() {
        let mut settings =
            TuneSettings::new(OptimizerConfig::new(Algorithm::Fox, 3, 2));
        settings.n_runs = 2;
        settings.episodes = 20;
        let task = TaskSpec::frozen_lake_default();
        let mut a = tune(&settings, &task, 9).unwrap();
        let mut b = tune(&settings, &task, 9).unwrap();
        a.wall_time = 0.0;
        b.wall_time = 0.0;
        assert_eq!(a, b);
    }
}
