//! Behavioural oracles for the training harness: closed-form statistics,
//! metrics-file round trips, bitwise determinism, and the bookkeeping
//! invariants that must hold for every agent/environment pairing.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use silcr_core::agents::{AgentKind, SacCore, SacCoreConfig, TrainCheckpoint};
use silcr_core::harness::{
    aggregate_seeds, evaluate, population_stats, random_policy_baseline, read_metrics,
    record_demos, run_ablation, train, write_metrics, MetricsRecord, RunConfig,
};
use silcr_core::nn::MlpParameters;
use silcr_core::replay::{write_demos, ExpertBuffer, Trajectory, Transition};
use silcr_core::Error;
use std::path::PathBuf;

/// A configuration small enough that a few thousand steps finish in seconds.
fn smoke_config(agent: AgentKind, env: &str) -> RunConfig {
    let mut config = RunConfig::new(agent, env);
    config.hidden_dims = vec![16, 16];
    config.batch_size = 32;
    config.online_capacity = 20_000;
    config.expert_capacity = 2_000;
    config.warmup_steps = 400;
    config.eval_interval = 500;
    config.eval_episodes = 2;
    config
}

fn net_bytes(net: &MlpParameters) -> Vec<u8> {
    let mut bytes = Vec::new();
    net.write_to(&mut bytes).unwrap();
    bytes
}

/// Field-for-field comparison ignoring `wall_time`, which is measured, not
/// computed, and therefore excluded from every determinism contract.
fn records_equal(a: &MetricsRecord, b: &MetricsRecord) -> bool {
    fn bits(x: f64, y: f64) -> bool {
        (x.is_nan() && y.is_nan()) || x.to_bits() == y.to_bits()
    }
    a.env_step == b.env_step
        && bits(a.return_train, b.return_train)
        && bits(a.return_eval, b.return_eval)
        && bits(a.q_loss, b.q_loss)
        && bits(a.policy_loss, b.policy_loss)
        && bits(a.expert_min, b.expert_min)
        && bits(a.expert_max, b.expert_max)
}

fn record(env_step: u64, return_eval: f64) -> MetricsRecord {
    MetricsRecord {
        env_step,
        return_train: -1.5,
        return_eval,
        q_loss: 0.25,
        policy_loss: -0.75,
        expert_min: f64::NAN,
        expert_max: f64::NAN,
        wall_time: 0.0,
    }
}

#[test]
fn defaults_match_the_published_table() {
    let config = RunConfig::new(AgentKind::Silcr, "pointgoal");
    assert_eq!(config.agent, AgentKind::Silcr);
    assert_eq!(config.env, "pointgoal");
    assert!(!config.episodic);
    assert_eq!(config.total_steps, 0);
    assert_eq!(config.seed, 0);
    assert_eq!(config.batch_size, 128);
    assert_eq!(config.gamma, 0.99);
    assert_eq!(config.tau, 0.05);
    assert_eq!(config.alpha, 0.2);
    assert_eq!(config.lr_actor, 3e-4);
    assert_eq!(config.lr_critic, 3e-4);
    assert_eq!(config.online_capacity, 1_000_000);
    assert_eq!(config.expert_capacity, 50_000);
    assert_eq!(config.hidden_dims, vec![800, 400]);
    assert_eq!(config.warmup_steps, 1000);
    assert_eq!(config.eval_interval, 1000);
    assert_eq!(config.eval_episodes, 10);
    assert_eq!(config.q_count, 2);
    assert!(config.demo_path.is_none());
    assert!(config.out_dir.is_none());
}

#[test]
fn validation_rejects_inconsistent_configs() {
    let ok = smoke_config(AgentKind::Sac, "pendulum");
    ok.validate().unwrap();

    let mut odd = ok.clone();
    odd.batch_size = 127;
    match odd.validate() {
        Err(Error::Config(msg)) => assert!(msg.contains("even"), "message was {msg:?}"),
        other => panic!("odd batch size accepted: {other:?}"),
    }

    let mut no_interval = ok.clone();
    no_interval.eval_interval = 0;
    assert!(matches!(no_interval.validate(), Err(Error::Config(_))));

    let mut no_episodes = ok.clone();
    no_episodes.eval_episodes = 0;
    assert!(matches!(no_episodes.validate(), Err(Error::Config(_))));

    let sqil = smoke_config(AgentKind::Sqil, "pendulum");
    match sqil.validate() {
        Err(Error::Config(msg)) => assert!(msg.contains("demo"), "message was {msg:?}"),
        other => panic!("sqil without demos accepted: {other:?}"),
    }

    let mut stray_demos = ok.clone();
    stray_demos.demo_path = Some(PathBuf::from("demos.txt"));
    match stray_demos.validate() {
        Err(Error::Config(msg)) => assert!(msg.contains("sqil"), "message was {msg:?}"),
        other => panic!("sac with demos accepted: {other:?}"),
    }

    let mut bad_env = ok.clone();
    bad_env.env = "gridworld".into();
    assert!(matches!(bad_env.validate(), Err(Error::Config(_))));
}

#[test]
fn digest_identifies_configs_but_not_seeds_or_paths() {
    let base = smoke_config(AgentKind::Silcr, "pointgoal");

    let mut reseeded = base.clone();
    reseeded.seed = 99;
    assert_eq!(base.digest(), reseeded.digest());

    let mut redirected = base.clone();
    redirected.out_dir = Some(PathBuf::from("elsewhere"));
    assert_eq!(base.digest(), redirected.digest());

    let mut discounted = base.clone();
    discounted.gamma = 0.95;
    assert_ne!(base.digest(), discounted.digest());

    let mut resized = base.clone();
    resized.hidden_dims = vec![16, 16, 16];
    assert_ne!(base.digest(), resized.digest());

    let mut retasked = base.clone();
    retasked.agent = AgentKind::Sac;
    assert_ne!(base.digest(), retasked.digest());
}

#[test]
fn closed_form_population_statistics() {
    assert_eq!(population_stats(&[1.0, 3.0]), (2.0, 1.0));
    assert_eq!(population_stats(&[5.0]), (5.0, 0.0));
    let (mean, std) = population_stats(&[]);
    assert!(mean.is_nan() && std.is_nan());

    // Same two-pass formula by hand on an arbitrary vector.
    let values = [0.25, -1.5, 3.0, 0.0, 2.5];
    let hand_mean = values.iter().sum::<f64>() / 5.0;
    let hand_std =
        (values.iter().map(|v| (v - hand_mean).powi(2)).sum::<f64>() / 5.0).sqrt();
    assert_eq!(population_stats(&values), (hand_mean, hand_std));
}

#[test]
fn zero_total_steps_yields_empty_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = smoke_config(AgentKind::Silcr, "pointgoal");
    config.episodic = true;
    config.out_dir = Some(dir.path().to_path_buf());
    let result = train(&config).unwrap();
    assert!(result.records.is_empty());
    assert_eq!(result.online.len(), 0);

    let metrics = read_metrics(dir.path().join("metrics.txt")).unwrap();
    assert_eq!(metrics.digest, config.digest());
    assert_eq!(metrics.seed, config.seed);
    assert!(metrics.records.is_empty());
}

#[test]
fn identical_runs_write_bitwise_identical_metrics_files() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut config = smoke_config(AgentKind::Silcr, "pointgoal");
    config.episodic = true;
    config.total_steps = 1500;
    config.seed = 11;

    config.out_dir = Some(dir_a.path().to_path_buf());
    let first = train(&config).unwrap();
    config.out_dir = Some(dir_b.path().to_path_buf());
    let second = train(&config).unwrap();

    assert_eq!(first.records.len(), 3);
    assert!(first
        .records
        .iter()
        .zip(&second.records)
        .all(|(a, b)| records_equal(a, b)));

    let bytes_a = std::fs::read(dir_a.path().join("metrics.txt")).unwrap();
    let bytes_b = std::fs::read(dir_b.path().join("metrics.txt")).unwrap();
    assert!(!bytes_a.is_empty());
    assert_eq!(bytes_a, bytes_b);
}

#[test]
fn metrics_files_round_trip_field_for_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("metrics.txt");
    let records = vec![
        MetricsRecord {
            env_step: 500,
            return_train: f64::NAN,
            return_eval: -12.625,
            q_loss: f64::NAN,
            policy_loss: f64::NAN,
            expert_min: f64::NAN,
            expert_max: f64::NAN,
            wall_time: 3.5,
        },
        MetricsRecord {
            env_step: 1000,
            return_train: -3.0,
            return_eval: 0.1,
            q_loss: 1e-9,
            policy_loss: -0.0,
            expert_min: -250.125,
            expert_max: 4.0,
            wall_time: 7.25,
        },
    ];
    write_metrics(&path, 0xdead_beef_1234_5678, 42, &records).unwrap();
    let metrics = read_metrics(&path).unwrap();
    assert_eq!(metrics.digest, 0xdead_beef_1234_5678);
    assert_eq!(metrics.seed, 42);
    assert_eq!(metrics.records.len(), 2);
    for (a, b) in records.iter().zip(&metrics.records) {
        assert!(records_equal(a, b));
    }
    // Wall time is deliberately not persisted.
    assert_eq!(metrics.records[0].wall_time, 0.0);

    let garbled = dir.path().join("garbled.txt");
    std::fs::write(&garbled, "not a metrics file\n").unwrap();
    assert!(matches!(read_metrics(&garbled), Err(Error::Format { .. })));
}

#[test]
fn evaluation_statistics_are_population_statistics() {
    let mut core_config = SacCoreConfig::new(6, 2);
    core_config.hidden_dims = vec![16, 16];
    core_config.init_seed = 5;
    let core = SacCore::new(core_config).unwrap();

    let summary = evaluate(&core, "pointgoal", 5, 17).unwrap();
    assert_eq!(summary.returns.len(), 5);
    let (mean, std) = population_stats(&summary.returns);
    assert_eq!(summary.mean, mean);
    assert_eq!(summary.std, std);

    let single = evaluate(&core, "pointgoal", 1, 17).unwrap();
    assert_eq!(single.std, 0.0);
    assert_eq!(single.returns.len(), 1);

    assert!(matches!(
        evaluate(&core, "pointgoal", 0, 17),
        Err(Error::Config(_))
    ));
    assert!(matches!(
        evaluate(&core, "gridworld", 1, 17),
        Err(Error::Config(_))
    ));
}

#[test]
fn same_seed_evaluations_are_bitwise_identical() {
    let mut core_config = SacCoreConfig::new(3, 1);
    core_config.hidden_dims = vec![16, 16];
    core_config.init_seed = 8;
    let core = SacCore::new(core_config).unwrap();

    let first = evaluate(&core, "pendulum", 4, 23).unwrap();
    let second = evaluate(&core, "pendulum", 4, 23).unwrap();
    assert_eq!(first.returns, second.returns);
    assert_eq!(first.mean.to_bits(), second.mean.to_bits());
    assert_eq!(first.std.to_bits(), second.std.to_bits());

    let other = evaluate(&core, "pendulum", 4, 24).unwrap();
    assert_ne!(first.returns, other.returns);
}

#[test]
fn recorded_demos_replay_the_evaluation_episodes() {
    let mut core_config = SacCoreConfig::new(3, 1);
    core_config.hidden_dims = vec![16, 16];
    core_config.init_seed = 31;
    let core = SacCore::new(core_config).unwrap();

    let demos = record_demos(&core, "pendulum", 3, 77).unwrap();
    let summary = evaluate(&core, "pendulum", 3, 77).unwrap();
    assert_eq!(demos.len(), 3);
    for (trajectory, eval_return) in demos.iter().zip(&summary.returns) {
        // Same seed derivation, same deterministic policy: the recorded
        // returns are the evaluation returns, bit for bit.
        assert_eq!(trajectory.episodic_return().to_bits(), eval_return.to_bits());
        assert_eq!(trajectory.len(), 200);
    }

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("demos.txt");
    write_demos(&path, &demos).unwrap();
    let reloaded = silcr_core::replay::read_demos(&path).unwrap();
    assert_eq!(demos, reloaded);
}

#[test]
fn transitions_pushed_match_env_steps() {
    // 700 dense pendulum steps: three full 200-step episodes plus a 100-step
    // tail that must still be flushed into the online buffer.
    let mut sac = smoke_config(AgentKind::Sac, "pendulum");
    sac.total_steps = 700;
    sac.warmup_steps = 650;
    let result = train(&sac).unwrap();
    assert_eq!(result.online.len(), 700);
    assert!(result.expert.is_none());

    // Episodic variant with an expert buffer: five completed episodes of 200
    // steps land in both buffers, the 100-step tail only in the online one.
    let mut silcr = smoke_config(AgentKind::Silcr, "pendulum");
    silcr.episodic = true;
    silcr.total_steps = 1100;
    let result = train(&silcr).unwrap();
    assert_eq!(result.online.len(), 1100);
    let expert = result.expert.expect("silcr trains with an expert buffer");
    assert_eq!(expert.trajectory_count(), 5);
    assert_eq!(expert.transition_count(), 1000);
}

#[test]
fn expert_minimum_never_falls_once_buffer_is_full() {
    // Buffer-level property over random offers: before the buffer first holds
    // `capacity` transitions the minimum may fall; afterwards it may only rise.
    let mut rng = ChaCha8Rng::seed_from_u64(402);
    let mut buffer = ExpertBuffer::new(40).unwrap();
    let mut seen_full = false;
    for _ in 0..300 {
        let full_before = buffer.transition_count() >= buffer.capacity();
        let min_before = buffer.min_return();
        let len = rng.gen_range(2..9);
        let reward = rng.gen_range(-5.0..5.0);
        let transitions: Vec<Transition> = (0..len)
            .map(|i| Transition {
                state: vec![rng.gen(), rng.gen()],
                action: vec![rng.gen()],
                reward_env: reward,
                next_state: vec![rng.gen(), rng.gen()],
                terminated: false,
                truncated: i == len - 1,
            })
            .collect();
        buffer.offer(Trajectory::new(transitions).unwrap());
        if full_before {
            seen_full = true;
            assert!(buffer.min_return().unwrap() >= min_before.unwrap());
            assert!(buffer.transition_count() >= buffer.capacity());
        }
    }
    assert!(seen_full);

    // The same shape at run level: pendulum episodes are always 200 steps, so
    // a 250-transition budget is crossed at the second episode and every
    // later record must show a non-decreasing minimum.
    let mut config = smoke_config(AgentKind::Silcr, "pendulum");
    config.episodic = true;
    config.total_steps = 1500;
    config.expert_capacity = 250;
    let result = train(&config).unwrap();
    assert_eq!(result.records.len(), 3);
    let mins: Vec<f64> = result.records.iter().map(|r| r.expert_min).collect();
    assert!(mins.iter().all(|m| m.is_finite()));
    assert!(mins[0] <= mins[1] && mins[1] <= mins[2]);
    for r in &result.records {
        assert!(r.expert_min <= r.expert_max);
    }
    let expert = result.expert.unwrap();
    assert_eq!(expert.trajectory_count(), 2);
    assert_eq!(expert.transition_count(), 400);
}

#[test]
fn training_is_independent_of_evaluation_workload() {
    // Doubling the evaluation episode count must not shift a single training
    // quantity: evaluation runs on its own environment and rng stream.
    let mut light = smoke_config(AgentKind::Silcr, "pointgoal");
    light.episodic = true;
    light.total_steps = 1200;
    light.seed = 3;
    let mut heavy = light.clone();
    heavy.eval_episodes = 4;

    let light = train(&light).unwrap();
    let heavy = train(&heavy).unwrap();
    assert_eq!(light.records.len(), heavy.records.len());
    let mut eval_differs = false;
    for (a, b) in light.records.iter().zip(&heavy.records) {
        assert_eq!(a.env_step, b.env_step);
        assert_eq!(a.return_train.to_bits(), b.return_train.to_bits());
        assert!(
            (a.q_loss.is_nan() && b.q_loss.is_nan())
                || a.q_loss.to_bits() == b.q_loss.to_bits()
        );
        assert!(
            (a.policy_loss.is_nan() && b.policy_loss.is_nan())
                || a.policy_loss.to_bits() == b.policy_loss.to_bits()
        );
        eval_differs |= a.return_eval.to_bits() != b.return_eval.to_bits();
    }
    assert!(eval_differs, "a 2- and a 4-episode mean coinciding bitwise");
    assert_eq!(
        net_bytes(light.core.policy_net()),
        net_bytes(heavy.core.policy_net())
    );
}

#[test]
fn warmup_only_runs_collect_but_never_update() {
    let mut config = smoke_config(AgentKind::Sac, "mountaincar");
    config.total_steps = 600;
    config.warmup_steps = 800;
    config.eval_interval = 200;
    config.seed = 6;
    let result = train(&config).unwrap();

    let steps: Vec<u64> = result.records.iter().map(|r| r.env_step).collect();
    assert_eq!(steps, vec![200, 400, 600]);
    for r in &result.records {
        assert!(r.q_loss.is_nan() && r.policy_loss.is_nan());
        assert!(r.return_eval.is_finite());
        assert!(r.expert_min.is_nan() && r.expert_max.is_nan());
    }

    // No update ever ran, so the networks still carry their seeded
    // initialization.
    let mut expected = SacCoreConfig::new(2, 1);
    expected.hidden_dims = config.hidden_dims.clone();
    expected.alpha = config.alpha;
    expected.gamma = config.gamma;
    expected.tau = config.tau;
    expected.lr_actor = config.lr_actor;
    expected.lr_critic = config.lr_critic;
    expected.q_count = config.q_count;
    expected.init_seed = config.seed;
    let fresh = SacCore::new(expected).unwrap();
    assert_eq!(net_bytes(result.core.policy_net()), net_bytes(fresh.policy_net()));
    assert_eq!(net_bytes(result.core.q1_net()), net_bytes(fresh.q1_net()));
}

#[test]
fn out_dir_receives_metrics_and_a_loadable_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = smoke_config(AgentKind::Silcr, "pendulum");
    config.episodic = true;
    config.total_steps = 700;
    config.out_dir = Some(dir.path().to_path_buf());
    let result = train(&config).unwrap();

    let metrics = read_metrics(dir.path().join("metrics.txt")).unwrap();
    assert_eq!(metrics.digest, config.digest());
    assert_eq!(metrics.seed, config.seed);
    assert_eq!(metrics.records.len(), result.records.len());
    for (a, b) in metrics.records.iter().zip(&result.records) {
        assert!(records_equal(a, b));
    }

    let checkpoint = TrainCheckpoint::load(dir.path().join("final.ckpt")).unwrap();
    assert_eq!(checkpoint.env_step, 700);
    assert_eq!(
        net_bytes(checkpoint.core.policy_net()),
        net_bytes(result.core.policy_net())
    );
    assert_eq!(
        net_bytes(checkpoint.core.q1_target_net()),
        net_bytes(result.core.q1_target_net())
    );
}

#[test]
fn aggregation_closed_forms() {
    let dir = tempfile::tempdir().unwrap();
    let low = dir.path().join("seed0.txt");
    let high = dir.path().join("seed1.txt");
    write_metrics(&low, 7, 0, &[record(500, 1.0), record(1000, -2.0)]).unwrap();
    write_metrics(&high, 7, 1, &[record(500, 3.0), record(1000, -2.0)]).unwrap();

    let curve = aggregate_seeds(&[low.clone(), high.clone()]).unwrap();
    assert_eq!(curve.len(), 2);
    assert_eq!(curve[0].env_step, 500);
    assert_eq!(curve[0].return_eval_mean, 2.0);
    assert_eq!(curve[0].return_eval_std, 1.0);
    assert_eq!(curve[1].return_eval_mean, -2.0);
    assert_eq!(curve[1].return_eval_std, 0.0);
    // Identical columns aggregate to their value with zero spread.
    assert_eq!(curve[0].q_loss_mean, 0.25);
    assert_eq!(curve[0].q_loss_std, 0.0);
    assert_eq!(curve[0].policy_loss_mean, -0.75);
    assert_eq!(curve[0].policy_loss_std, 0.0);

    assert!(matches!(
        aggregate_seeds(&[low.clone()]),
        Err(Error::Config(_))
    ));

    let short = dir.path().join("short.txt");
    write_metrics(&short, 7, 2, &[record(500, 0.0)]).unwrap();
    assert!(matches!(
        aggregate_seeds(&[low.clone(), short]),
        Err(Error::Input(_))
    ));

    let shifted = dir.path().join("shifted.txt");
    write_metrics(&shifted, 7, 3, &[record(500, 0.0), record(1500, 0.0)]).unwrap();
    match aggregate_seeds(&[low.clone(), shifted]) {
        Err(Error::Input(msg)) => assert!(msg.contains("step"), "message was {msg:?}"),
        other => panic!("misaligned grids accepted: {other:?}"),
    }

    let foreign = dir.path().join("foreign.txt");
    write_metrics(&foreign, 8, 0, &[record(500, 1.0), record(1000, -2.0)]).unwrap();
    match aggregate_seeds(&[low, foreign]) {
        Err(Error::Input(msg)) => {
            assert!(msg.contains("config"), "message was {msg:?}")
        }
        other => panic!("mixed configurations accepted: {other:?}"),
    }
}

#[test]
fn single_capacity_ablation_is_plain_training() {
    let mut base = smoke_config(AgentKind::Silcr, "pendulum");
    base.episodic = true;
    base.total_steps = 900;
    base.seed = 4;

    let arms = run_ablation(&base, &[base.expert_capacity]).unwrap();
    assert_eq!(arms.len(), 1);
    assert_eq!(arms[0].expert_capacity, base.expert_capacity);
    let plain = train(&base).unwrap();
    assert_eq!(arms[0].result.records.len(), plain.records.len());
    for (a, b) in arms[0].result.records.iter().zip(&plain.records) {
        assert!(records_equal(a, b));
    }

    assert!(matches!(run_ablation(&base, &[]), Err(Error::Config(_))));

    let arms = run_ablation(&base, &[300, 600]).unwrap();
    assert_eq!(arms.len(), 2);
    assert_eq!(arms[0].result.expert.as_ref().unwrap().capacity(), 300);
    assert_eq!(arms[1].result.expert.as_ref().unwrap().capacity(), 600);
}

#[test]
fn ablation_arms_write_separate_metric_files() {
    let dir = tempfile::tempdir().unwrap();
    let mut base = smoke_config(AgentKind::Silcr, "pendulum");
    base.episodic = true;
    base.total_steps = 500;
    base.out_dir = Some(dir.path().to_path_buf());

    run_ablation(&base, &[300, 600]).unwrap();
    for capacity in [300, 600] {
        let arm_dir = dir.path().join(format!("expert{capacity}"));
        let metrics = read_metrics(arm_dir.join("metrics.txt")).unwrap();
        assert_eq!(metrics.records.len(), 1);
        TrainCheckpoint::load(arm_dir.join("final.ckpt")).unwrap();
    }
}

#[test]
fn sqil_loads_demos_verbatim_and_skips_updates_until_ready() {
    let dir = tempfile::tempdir().unwrap();
    let demo_path = dir.path().join("demos.txt");
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let demos: Vec<Trajectory> = (0..4)
        .map(|_| {
            let len = rng.gen_range(5..9);
            let transitions: Vec<Transition> = (0..len)
                .map(|i| Transition {
                    state: vec![rng.gen_range(-1.0..0.6), rng.gen_range(-0.07..0.07)],
                    action: vec![rng.gen_range(-1.0..1.0)],
                    reward_env: rng.gen_range(-0.01..10.0),
                    next_state: vec![rng.gen_range(-1.0..0.6), rng.gen_range(-0.07..0.07)],
                    terminated: false,
                    truncated: i == len - 1,
                })
                .collect();
            Trajectory::new(transitions).unwrap()
        })
        .collect();
    let demo_transitions: usize = demos.iter().map(|t| t.len()).sum();
    let demo_returns: Vec<f64> = demos.iter().map(|t| t.episodic_return()).collect();
    write_demos(&demo_path, &demos).unwrap();

    let mut config = smoke_config(AgentKind::Sqil, "mountaincar");
    config.total_steps = 700;
    config.warmup_steps = 300;
    config.eval_interval = 350;
    config.eval_episodes = 1;
    config.demo_path = Some(demo_path.clone());
    let result = train(&config).unwrap();

    // Mountain car truncates at 500 steps, so the online buffer holds nothing
    // until then: the update at steps 301..500 must skip, not fail.
    assert_eq!(result.records.len(), 2);
    assert!(result.records[0].q_loss.is_nan());
    assert!(result.records[1].q_loss.is_finite());

    // The demo buffer is the expert buffer, untouched by training.
    let expert = result.expert.unwrap();
    assert_eq!(expert.trajectory_count(), 4);
    assert_eq!(expert.transition_count(), demo_transitions);
    let min = demo_returns.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = demo_returns.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    assert_eq!(expert.min_return().unwrap(), min);
    assert_eq!(expert.max_return().unwrap(), max);

    // Demos recorded on one environment do not fit another.
    let mut mismatched = config.clone();
    mismatched.env = "pendulum".into();
    mismatched.episodic = false;
    match train(&mismatched) {
        Err(Error::Config(msg)) => {
            assert!(msg.contains("dim") || msg.contains("component"), "message was {msg:?}")
        }
        other => panic!("mismatched demo dims accepted: {other:?}"),
    }

    // A missing demo file is a startup error.
    let mut missing = config.clone();
    missing.demo_path = Some(dir.path().join("absent.txt"));
    assert!(matches!(train(&missing), Err(Error::Io { .. })));
}

#[test]
fn metric_records_land_on_the_evaluation_grid() {
    let mut config = smoke_config(AgentKind::Sac, "pendulum");
    config.total_steps = 1000;
    config.eval_interval = 300;
    let result = train(&config).unwrap();
    let steps: Vec<u64> = result.records.iter().map(|r| r.env_step).collect();
    assert_eq!(steps, vec![300, 600, 900]);

    config.eval_interval = 1500;
    let result = train(&config).unwrap();
    assert!(result.records.is_empty());
}

#[test]
fn random_baseline_is_reproducible_and_scores_like_noise() {
    let first = random_policy_baseline("pointgoal", 5, 19).unwrap();
    let second = random_policy_baseline("pointgoal", 5, 19).unwrap();
    assert_eq!(first.returns, second.returns);
    assert!(first.mean < 0.0, "random point-goal pays distance penalties");

    let pendulum = random_policy_baseline("pendulum", 3, 19).unwrap();
    assert!(pendulum.mean < 0.0, "random swings pay angle costs");
}
