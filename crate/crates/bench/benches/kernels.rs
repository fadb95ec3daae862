//! Throughput of the numeric kernels the training loop spends its time in:
//! network passes, optimizer steps, replay-buffer traffic, and one full
//! agent update.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silcr_core::agents::{SacCore, SacCoreConfig};
use silcr_core::nn::{adam_step, AdamState, GradientBundle, MlpParameters};
use silcr_core::replay::{
    make_training_batch, ExpertBuffer, OnlineBuffer, Trajectory, Transition,
};
use silcr_core::envs::make_env;

fn random_trajectory(rng: &mut ChaCha8Rng, len: usize) -> Trajectory {
    let transitions: Vec<Transition> = (0..len)
        .map(|i| Transition {
            state: (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            action: (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            reward_env: rng.gen_range(-1.0..1.0),
            next_state: (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            terminated: false,
            truncated: i == len - 1,
        })
        .collect();
    Trajectory::new(transitions).unwrap()
}

fn network_passes(c: &mut Criterion) {
    let wide = MlpParameters::init(&[8, 800, 400, 1], 0).unwrap();
    let input: Vec<f64> = (0..8).map(|i| (i as f64) * 0.1 - 0.4).collect();
    c.bench_function("forward_800x400", |b| {
        b.iter(|| wide.forward(std::hint::black_box(&input)).unwrap())
    });

    let net = MlpParameters::init(&[8, 64, 64, 1], 0).unwrap();
    c.bench_function("forward_64x64", |b| {
        b.iter(|| net.forward(std::hint::black_box(&input)).unwrap())
    });

    let (_, cache) = net.forward(&input).unwrap();
    let mut grads = GradientBundle::zeros_like(&net);
    c.bench_function("backward_64x64", |b| {
        b.iter(|| {
            net.backward_accumulate(std::hint::black_box(&cache), &[1.0], &mut grads)
                .unwrap()
        })
    });
}

fn optimizer(c: &mut Criterion) {
    let net = MlpParameters::init(&[8, 64, 64, 1], 0).unwrap();
    let input: Vec<f64> = (0..8).map(|i| (i as f64) * 0.1 - 0.4).collect();
    let (_, cache) = net.forward(&input).unwrap();
    let (grads, _) = net.backward(&cache, &[1.0]).unwrap();
    c.bench_function("adam_step_64x64", |b| {
        b.iter_batched(
            || (net.clone(), AdamState::new(&net)),
            |(mut params, mut state)| adam_step(&mut params, &grads, &mut state, 3e-4).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn buffers(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut online = OnlineBuffer::new(100_000).unwrap();
    let mut expert = ExpertBuffer::new(2_000).unwrap();
    for _ in 0..400 {
        let trajectory = random_trajectory(&mut rng, 50);
        online.store_trajectory(&trajectory);
        expert.offer(trajectory);
    }

    c.bench_function("expert_offer_with_eviction", |b| {
        b.iter_batched(
            || (expert.clone(), random_trajectory(&mut rng, 50)),
            |(mut buffer, trajectory)| buffer.offer(trajectory),
            BatchSize::SmallInput,
        )
    });

    let mut sample_rng = ChaCha8Rng::seed_from_u64(2);
    c.bench_function("half_and_half_batch_128", |b| {
        b.iter(|| make_training_batch(&online, &expert, 128, &mut sample_rng).unwrap())
    });
}

fn agent_update(c: &mut Criterion) {
    let mut config = SacCoreConfig::new(6, 2);
    config.hidden_dims = vec![64, 64];
    let mut core = SacCore::new(config).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut online = OnlineBuffer::new(100_000).unwrap();
    let mut expert = ExpertBuffer::new(2_000).unwrap();
    for _ in 0..100 {
        let trajectory = random_trajectory(&mut rng, 50);
        online.store_trajectory(&trajectory);
        expert.offer(trajectory);
    }
    let mut buffer_rng = ChaCha8Rng::seed_from_u64(4);
    let mut policy_rng = ChaCha8Rng::seed_from_u64(5);
    c.bench_function("update_relabeled_batch_128", |b| {
        b.iter(|| {
            core.update_relabeled(&online, &expert, 128, &mut buffer_rng, &mut policy_rng)
                .unwrap()
        })
    });
}

fn environment_steps(c: &mut Criterion) {
    let mut env = make_env("pendulum", false).unwrap();
    env.reset(0);
    let mut steps = 0u64;
    c.bench_function("pendulum_step", |b| {
        b.iter(|| {
            steps += 1;
            if steps % 200 == 0 {
                env.reset(steps);
            }
            env.step(std::hint::black_box(&[0.5])).unwrap()
        })
    });
}

criterion_group!(
    benches,
    network_passes,
    optimizer,
    buffers,
    agent_update,
    environment_steps
);
criterion_main!(benches);
