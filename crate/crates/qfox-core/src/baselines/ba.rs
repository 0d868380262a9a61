//! Bat algorithm: frequency-tuned velocities, loudness-gated acceptance and
//! pulse-rate-gated local search around the global best.

use rand::Rng;
use rayon::prelude::*;

use crate::fox::argmin;
use crate::opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
use crate::seed::stream;

const INIT_TAG: u64 = 0xba01;
const MOVE_TAG: u64 = 0xba02;

#[derive(Debug, Clone, PartialEq)]
pub struct BaParams {
    pub freq_min: f64,
    pub freq_max: f64,
    pub initial_loudness: f64,
    pub initial_pulse_rate: f64,
    /// Loudness decay per accepted move.
    pub alpha: f64,
    /// Pulse-rate growth constant.
    pub gamma: f64,
}

impl Default for BaParams {
    fn default() -> Self {
        Self {
            freq_min: 0.0,
            freq_max: 2.0,
            initial_loudness: 1.0,
            initial_pulse_rate: 0.5,
            alpha: 0.9,
            gamma: 0.9,
        }
    }
}

struct Bat {
    position: Vec<f64>,
    velocity: Vec<f64>,
    fitness: f64,
    loudness: f64,
    pulse_rate: f64,
}

pub fn ba_optimize<O: Objective>(
    objective: &O,
    bounds: &Bounds,
    g: usize,
    max_iter: usize,
    seed: u64,
    params: &BaParams,
) -> Result<OptRun, OptError> {
    if g == 0 {
        return Err(OptError::EmptyPopulation);
    }
    let dim = bounds.dim();
    let mut rng = stream(seed, &[INIT_TAG]);
    let mut bats: Vec<Bat> = (0..g)
        .map(|_| Bat {
            position: bounds.sample(&mut rng),
            velocity: vec![0.0; dim],
            fitness: f64::INFINITY,
            loudness: params.initial_loudness,
            pulse_rate: params.initial_pulse_rate,
        })
        .collect();
    let initial: Result<Vec<f64>, OptError> = bats
        .par_iter()
        .enumerate()
        .map(|(agent, b)| eval(objective, &b.position, 0, agent))
        .collect();
    for (b, f) in bats.iter_mut().zip(initial?) {
        b.fitness = f;
    }
    let mut best = {
        let snapshot: Vec<Candidate> = bats
            .iter()
            .map(|b| Candidate { position: b.position.clone(), fitness: b.fitness })
            .collect();
        snapshot[argmin(&snapshot)].clone()
    };
    let mut history = vec![best.fitness];

    for iter in 0..max_iter {
        let best_position = best.position.clone();
        let mean_loudness = bats.iter().map(|b| b.loudness).sum::<f64>() / g as f64;
        let moved: Result<Vec<(Vec<f64>, Vec<f64>, f64, bool)>, OptError> = bats
            .par_iter()
            .enumerate()
            .map(|(agent, bat)| {
                let mut rng = stream(seed, &[MOVE_TAG, iter as u64, agent as u64]);
                let freq = params.freq_min
                    + (params.freq_max - params.freq_min) * rng.random::<f64>();
                let mut velocity = bat.velocity.clone();
                let mut position = bat.position.clone();
                for d in 0..dim {
                    velocity[d] += (position[d] - best_position[d]) * freq;
                    position[d] += velocity[d];
                }
                if rng.random::<f64>() > bat.pulse_rate {
                    // local walk around the current best
                    for (d, v) in position.iter_mut().enumerate() {
                        let eps: f64 = rng.random_range(-1.0..=1.0);
                        *v = best_position[d] + eps * mean_loudness * 0.1 * bounds.width(d);
                    }
                }
                bounds.clamp(&mut position);
                let fitness = eval(objective, &position, iter + 1, agent)?;
                let accept = rng.random::<f64>() < bat.loudness && fitness <= bat.fitness;
                Ok((position, velocity, fitness, accept))
            })
            .collect();
        for (bat, (position, velocity, fitness, accept)) in bats.iter_mut().zip(moved?) {
            if fitness < best.fitness {
                best = Candidate { position: position.clone(), fitness };
            }
            bat.velocity = velocity;
            if accept {
                bat.position = position;
                bat.fitness = fitness;
                bat.loudness *= params.alpha;
                bat.pulse_rate = params.initial_pulse_rate
                    * (1.0 - (-params.gamma * (iter + 1) as f64).exp());
            }
        }
        history.push(best.fitness);
    }
    Ok(OptRun { best, history })
}

fn eval<O: Objective>(
    objective: &O,
    x: &[f64],
    iteration: usize,
    agent: usize,
) -> Result<f64, OptError> {
    objective
        .eval(x, EvalCtx { iteration, agent })
        .map_err(|source| OptError::Objective { iteration, agent, source })
}
