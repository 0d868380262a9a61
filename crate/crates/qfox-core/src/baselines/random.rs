//! Uniform random search over the box.

use rayon::prelude::*;

use crate::opt::{Bounds, Candidate, EvalCtx, Objective, OptError, OptRun};
use crate::seed::stream;

const SAMPLE_TAG: u64 = 0x4a0d;

/// Evaluate `n_samples` uniform points; the history is the running best,
/// one entry per sample.
pub fn random_search<O: Objective>(
    objective: &O,
    bounds: &Bounds,
    n_samples: usize,
    seed: u64,
) -> Result<OptRun, OptError> {
    if n_samples == 0 {
        return Err(OptError::EmptyPopulation);
    }
    let evaluated: Result<Vec<Candidate>, OptError> = (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, &[SAMPLE_TAG, i as u64]);
            let position = bounds.sample(&mut rng);
            let fitness = objective
                .eval(&position, EvalCtx { iteration: i, agent: 0 })
                .map_err(|source| OptError::Objective { iteration: i, agent: 0, source })?;
            Ok(Candidate { position, fitness })
        })
        .collect();
    let evaluated = evaluated?;
    let mut best = evaluated[0].clone();
    let mut history = Vec::with_capacity(n_samples);
    for c in evaluated {
        if c.fitness < best.fitness {
            best = c;
        }
        history.push(best.fitness);
    }
    Ok(OptRun { best, history })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opt::ObjectiveError;

    fn sphere(x: &[f64], _: EvalCtx) -> Result<f64, ObjectiveError> {
        Ok(x.iter().map(|v| v * v).sum())
    }

    #[test]
    fn single_sample_is_that_point() {
        let b = Bounds::new(vec![(-1.0, 1.0)]).unwrap();
        let run = random_search(&sphere, &b, 1, 4).unwrap();
        assert_eq!(run.history.len(), 1);
        assert_eq!(run.history[0], run.best.fitness);
        assert!((run.best.position[0] * run.best.position[0] - run.best.fitness).abs() < 1e-15);
    }

    #[test]
    fn running_best_nonincreasing_and_bounded_by_first() {
        let b = Bounds::new(vec![(-5.0, 5.0), (-5.0, 5.0)]).unwrap();
        let run = random_search(&sphere, &b, 200, 8).unwrap();
        assert_eq!(run.history.len(), 200);
        for w in run.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert!(run.best.fitness <= run.history[0]);
    }

    #[test]
    fn zero_samples_rejected() {
        let b = Bounds::new(vec![(-1.0, 1.0)]).unwrap();
        assert!(random_search(&sphere, &b, 0, 0).is_err());
    }
}
