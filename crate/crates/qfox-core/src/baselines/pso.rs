//! Global-best particle swarm optimization.

use rand::Rng;
use rayon::prelude::*;

use crate::fox::argmin;
use crate::opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
use crate::seed::stream;

const INIT_TAG: u64 = 0x9501;
const MOVE_TAG: u64 = 0x9502;

#[derive(Debug, Clone, PartialEq)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp as a fraction of each dimension's box width.
    pub velocity_clamp: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { inertia: 0.7, cognitive: 1.5, social: 1.5, velocity_clamp: 0.2 }
    }
}

struct Particle {
    position: Vec<f64>,
    velocity: Vec<f64>,
    best_position: Vec<f64>,
    best_fitness: f64,
}

pub fn pso_optimize<O: Objective>(
    objective: &O,
    bounds: &Bounds,
    g: usize,
    max_iter: usize,
    seed: u64,
    params: &PsoParams,
) -> Result<OptRun, OptError> {
    if g == 0 {
        return Err(OptError::EmptyPopulation);
    }
    let dim = bounds.dim();
    let mut rng = stream(seed, &[INIT_TAG]);
    let mut particles: Vec<Particle> = (0..g)
        .map(|_| {
            let position = bounds.sample(&mut rng);
            Particle {
                best_position: position.clone(),
                position,
                velocity: vec![0.0; dim],
                best_fitness: f64::INFINITY,
            }
        })
        .collect();

    let initial: Result<Vec<f64>, OptError> = particles
        .par_iter()
        .enumerate()
        .map(|(agent, p)| eval(objective, &p.position, 0, agent))
        .collect();
    for (p, f) in particles.iter_mut().zip(initial?) {
        p.best_fitness = f;
    }
    let mut global = {
        let snapshot: Vec<Candidate> = particles
            .iter()
            .map(|p| Candidate { position: p.best_position.clone(), fitness: p.best_fitness })
            .collect();
        snapshot[argmin(&snapshot)].clone()
    };
    let mut history = Vec::with_capacity(max_iter + 1);
    history.push(global.fitness);

    for iter in 0..max_iter {
        let global_position = global.position.clone();
        let results: Result<Vec<(Vec<f64>, Vec<f64>, f64)>, OptError> = particles
            .par_iter()
            .enumerate()
            .map(|(agent, p)| {
                let mut rng = stream(seed, &[MOVE_TAG, iter as u64, agent as u64]);
                let mut position = p.position.clone();
                let mut velocity = p.velocity.clone();
                for d in 0..dim {
                    let r1: f64 = rng.random();
                    let r2: f64 = rng.random();
                    let vmax = params.velocity_clamp * bounds.width(d);
                    velocity[d] = params.inertia * velocity[d]
                        + params.cognitive * r1 * (p.best_position[d] - position[d])
                        + params.social * r2 * (global_position[d] - position[d]);
                    velocity[d] = velocity[d].clamp(-vmax, vmax);
                    position[d] += velocity[d];
                }
                bounds.clamp(&mut position);
                let fitness = eval(objective, &position, iter + 1, agent)?;
                Ok((position, velocity, fitness))
            })
            .collect();
        for (p, (position, velocity, fitness)) in particles.iter_mut().zip(results?) {
            if fitness < p.best_fitness {
                p.best_fitness = fitness;
                p.best_position = position.clone();
            }
            if fitness < global.fitness {
                global = Candidate { position: position.clone(), fitness };
            }
            p.position = position;
            p.velocity = velocity;
        }
        history.push(global.fitness);
    }
    Ok(OptRun { best: global, history })
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
