//! Generational genetic algorithm: tournament selection, uniform crossover,
//! Gaussian mutation, single-elite carryover.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::fox::argmin;
use crate::opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
use crate::seed::stream;

const INIT_TAG: u64 = 0x6a01;
const CHILD_TAG: u64 = 0x6a02;

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Mutation sigma as a fraction of each dimension's box width.
    pub mutation_sigma: f64,
    pub mutation_rate: f64,
    pub elites: usize,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            tournament_size: 3,
            crossover_rate: 0.9,
            mutation_sigma: 0.1,
            mutation_rate: 0.1,
            elites: 1,
        }
    }
}

pub fn ga_optimize<O: Objective>(
    objective: &O,
    bounds: &Bounds,
    g: usize,
    max_iter: usize,
    seed: u64,
    params: &GaParams,
) -> Result<OptRun, OptError> {
    if g == 0 {
        return Err(OptError::EmptyPopulation);
    }
    let mut rng = stream(seed, &[INIT_TAG]);
    let mut population: Vec<Candidate> =
        (0..g).map(|_| Candidate::unevaluated(bounds.sample(&mut rng))).collect();
    let initial: Result<Vec<f64>, OptError> = population
        .par_iter()
        .enumerate()
        .map(|(agent, c)| eval(objective, &c.position, 0, agent))
        .collect();
    for (c, f) in population.iter_mut().zip(initial?) {
        c.fitness = f;
    }
    let mut best = population[argmin(&population)].clone();
    let mut history = vec![best.fitness];

    for gen in 0..max_iter {
        let parents = population.clone();
        let elite = parents[argmin(&parents)].position.clone();
        // Children 0..elites clone the elite genes; all children are
        // (re-)evaluated so every generation costs exactly g evaluations.
        let children: Result<Vec<Candidate>, OptError> = (0..g)
            .into_par_iter()
            .map(|agent| {
                let mut rng = stream(seed, &[CHILD_TAG, gen as u64, agent as u64]);
                let mut genes = if agent < params.elites.min(g) {
                    elite.clone()
                } else {
                    let a = tournament(&parents, params.tournament_size, &mut rng);
                    let b = tournament(&parents, params.tournament_size, &mut rng);
                    let mut genes = a.position.clone();
                    if rng.random::<f64>() < params.crossover_rate {
                        for (gene, other) in genes.iter_mut().zip(&b.position) {
                            if rng.random::<f64>() < 0.5 {
                                *gene = *other;
                            }
                        }
                    }
                    for (d, gene) in genes.iter_mut().enumerate() {
                        if rng.random::<f64>() < params.mutation_rate {
                            let sigma = params.mutation_sigma * bounds.width(d);
                            let normal = Normal::new(0.0, sigma).expect("sigma is finite");
                            *gene += normal.sample(&mut rng);
                        }
                    }
                    genes
                };
                bounds.clamp(&mut genes);
                let fitness = eval(objective, &genes, gen + 1, agent)?;
                Ok(Candidate { position: genes, fitness })
            })
            .collect();
        population = children?;
        let gen_best = &population[argmin(&population)];
        if gen_best.fitness < best.fitness {
            best = gen_best.clone();
        }
        history.push(best.fitness);
    }
    Ok(OptRun { best, history })
}

fn tournament<'a>(
    population: &'a [Candidate],
    size: usize,
    rng: &mut impl Rng,
) -> &'a Candidate {
    let mut winner = &population[rng.random_range(0..population.len())];
    for _ in 1..size.max(1) {
        let challenger = &population[rng.random_range(0..population.len())];
        if challenger.fitness < winner.fitness {
            winner = challenger;
        }
    }
    winner
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
