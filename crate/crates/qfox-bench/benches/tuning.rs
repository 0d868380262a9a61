use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use qfox_core::envs::{CartPoleEnv, Environment, FrozenLakeEnv};
use qfox_core::fox;
use qfox_core::opt::{Bounds, EvalCtx};
use qfox_core::qlearn::{self, EpsilonSchedule, Hyperparams};
use qfox_core::seed::stream;

fn bench_env_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("env_step");
    group.bench_function("frozen_lake", |b| {
        let mut env = FrozenLakeEnv::standard();
        let mut rng = stream(1, &[]);
        let mut state = env.reset(&mut rng);
        b.iter(|| {
            let t = env.step(black_box(state % 4), &mut rng).unwrap();
            state = if t.terminated || t.truncated { env.reset(&mut rng) } else { t.next_state };
            state
        });
    });
    group.bench_function("cart_pole", |b| {
        let mut env = CartPoleEnv::standard();
        let mut rng = stream(2, &[]);
        let mut state = env.reset(&mut rng);
        b.iter(|| {
            let t = env.step(black_box(state % 2), &mut rng).unwrap();
            state = if t.terminated || t.truncated { env.reset(&mut rng) } else { t.next_state };
            state
        });
    });
    group.finish();
}

fn bench_training_run(c: &mut Criterion) {
    let hp = Hyperparams::new(0.74, 0.97).unwrap();
    c.bench_function("train_frozen_lake_200_episodes", |b| {
        b.iter(|| {
            let mut env = FrozenLakeEnv::standard();
            let mut rng = stream(3, &[]);
            qlearn::train(&mut env, black_box(hp), 200, EpsilonSchedule::default(), &mut rng)
                .unwrap()
        });
    });
}

fn bench_fox_sphere(c: &mut Criterion) {
    let bounds = Bounds::new(vec![(-5.0, 5.0); 2]).unwrap();
    let sphere =
        |x: &[f64], _: EvalCtx| Ok(x.iter().map(|v| v * v).sum::<f64>());
    c.bench_function("fox_sphere_g10_iter50", |b| {
        b.iter(|| fox::optimize(&sphere, black_box(&bounds), 10, 50, 4).unwrap());
    });
}

criterion_group!(benches, bench_env_step, bench_training_run, bench_fox_sphere);
criterion_main!(benches);
