use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use neadmm::engine::{RhoSchedule, StopCriteria};
use neadmm::maxop::{maxop_solve, t_update_all, MaxOpProblem, MaxOpState, TUpdateInstance};
use neadmm::par::Execution;
use neadmm::sphere::{sphere_update_w_batch, WUpdateInput};
use neadmm::synth::generate_bags;
use neadmm::terms::{DenseVector, L1Norm, LogisticLoss};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn t_update(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bags: Vec<TUpdateInstance> = (0..50_000)
        .map(|_| {
            let n = rng.random_range(1..=40);
            TUpdateInstance::new(
                rng.random_range(-3.0..3.0),
                DenseVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0)),
            )
        })
        .collect();
    let mut group = c.benchmark_group("t_update_all/50k_bags");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &bags, |b, bags| {
            b.iter(|| t_update_all(mode, black_box(bags)))
        });
    }
    group.finish();
}

fn w_update(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let inputs: Vec<WUpdateInput> = (0..20_000)
        .map(|_| WUpdateInput {
            x: DenseVector::from_fn(64, |_, _| rng.random_range(-2.0..2.0)),
            y1: rng.random_range(-2.0..2.0),
            y2: DenseVector::from_fn(64, |_, _| rng.random_range(-2.0..2.0)),
            rho: 1.0,
        })
        .collect();
    let mut group = c.benchmark_group("sphere_update_w_batch/20k_x_64");
    for (name, mode) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &inputs, |b, inputs| {
            b.iter(|| sphere_update_w_batch(mode, black_box(inputs)))
        });
    }
    group.finish();
}

fn maxop(c: &mut Criterion) {
    let (data, _) = generate_bags(2_000, 20, 8, 3).expect("valid sizes");
    let loss = LogisticLoss::new(data.labels.clone());
    let reg = L1Norm::new(1.0);
    let mut group = c.benchmark_group("maxop_solve/2000_bags_20_iterations");
    group.sample_size(10);
    for (name, mode) in MODES {
        let mut problem = MaxOpProblem::new(&data, &loss, &reg);
        problem.execution = mode;
        group.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                maxop_solve(
                    &problem,
                    MaxOpState::zeros(&data, 1.0),
                    RhoSchedule::Constant(1.0),
                    StopCriteria::with_max_iter(20),
                )
                .map(|o| o.trace.len())
            })
        });
    }
    group.finish();
}

criterion_group!(benches, t_update, w_update, maxop);
criterion_main!(benches);
