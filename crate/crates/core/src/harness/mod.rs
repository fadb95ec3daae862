//! The outer training loop: rollout collection, trajectory routing into the
//! replay buffers, periodic deterministic evaluation, and the multi-seed and
//! ablation drivers built on top of it.
//!
//! Everything here is deterministic given the run configuration and seed.
//! Four independent rng streams (environment resets, action sampling, batch
//! sampling, evaluation) keep the evaluation schedule from perturbing what
//! the agent experiences.

mod metrics;

pub use metrics::{
    aggregate_seeds, read_metrics, render_aggregate, write_metrics, AggregateRecord, MetricsFile,
    MetricsRecord,
};

use crate::agents::{AgentKind, SacCore, SacCoreConfig, TrainCheckpoint, UpdateMetrics};
use crate::envs::{make_env, rescale_action, EnvSpec};
use crate::error::{Error, Result};
use crate::replay::{read_demos, ExpertBuffer, OnlineBuffer, Trajectory, Transition};
use crate::rng::{seeded, RngSnapshot, Stream};
use rand::{Rng, RngCore};
use std::fs;
use std::path::PathBuf;
use std::time::Instant;

/// Everything a single training run needs. `new` fills in the defaults used
/// for all reported experiments; callers override fields directly.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub agent: AgentKind,
    pub env: String,
    /// Wrap the environment so the summed reward arrives only at episode end.
    pub episodic: bool,
    pub total_steps: u64,
    pub seed: u64,
    pub batch_size: usize,
    pub gamma: f64,
    pub tau: f64,
    pub alpha: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    pub online_capacity: usize,
    /// Transition budget of the expert buffer (SILCR only; SQIL sizes its
    /// buffer to the demo file, SAC has none).
    pub expert_capacity: usize,
    pub hidden_dims: Vec<usize>,
    /// Steps of uniform-random actions before the first gradient update.
    pub warmup_steps: u64,
    pub eval_interval: u64,
    pub eval_episodes: u64,
    pub q_count: usize,
    /// Demonstrations to preload (SQIL only).
    pub demo_path: Option<PathBuf>,
    /// When set, the run writes `metrics.txt` and `final.ckpt` here.
    pub out_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(agent: AgentKind, env: impl Into<String>) -> Self {
        RunConfig {
            agent,
            env: env.into(),
            episodic: false,
            total_steps: 0,
            seed: 0,
            batch_size: 128,
            gamma: 0.99,
            tau: 0.05,
            alpha: 0.2,
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            online_capacity: 1_000_000,
            expert_capacity: 50_000,
            hidden_dims: vec![800, 400],
            warmup_steps: 1000,
            eval_interval: 1000,
            eval_episodes: 10,
            q_count: 2,
            demo_path: None,
            out_dir: None,
        }
    }

    /// Checks the harness-level fields. Network and optimizer scalars are
    /// validated when the agent is built, so a bad `gamma` still fails before
    /// the first environment step.
    pub fn validate(&self) -> Result<()> {
        make_env(&self.env, self.episodic)?;
        if self.batch_size == 0 || self.batch_size % 2 != 0 {
            return Err(Error::Config(format!(
                "batch size must be even and positive, got {}",
                self.batch_size
            )));
        }
        if self.eval_interval == 0 {
            return Err(Error::Config(
                "evaluation interval must be at least 1 step".into(),
            ));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config(
                "evaluation needs at least one episode".into(),
            ));
        }
        match (self.agent, &self.demo_path) {
            (AgentKind::Sqil, None) => Err(Error::Config(
                "sqil trains from recorded demonstrations; set demo_path".into(),
            )),
            (AgentKind::Silcr | AgentKind::Sac, Some(_)) => Err(Error::Config(
                "demo_path only applies to sqil".into(),
            )),
            _ => Ok(()),
        }
    }

    /// A 64-bit FNV-1a fingerprint of every field that shapes the training
    /// computation. The seed and the output/demo paths are deliberately
    /// excluded, so runs of one experiment share a digest across seeds.
    pub fn digest(&self) -> u64 {
        let text = format!(
            "agent={} env={} episodic={} total_steps={} batch_size={} gamma={} tau={} \
             alpha={} lr_actor={} lr_critic={} online_capacity={} expert_capacity={} \
             hidden_dims={:?} warmup_steps={} eval_interval={} eval_episodes={} q_count={}",
            self.agent,
            self.env,
            self.episodic,
            self.total_steps,
            self.batch_size,
            self.gamma,
            self.tau,
            self.alpha,
            self.lr_actor,
            self.lr_critic,
            self.online_capacity,
            self.expert_capacity,
            self.hidden_dims,
            self.warmup_steps,
            self.eval_interval,
            self.eval_episodes,
            self.q_count
        );
        fnv1a(text.as_bytes())
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Mean and population standard deviation (`1/n` normalization, matching how
/// per-seed spreads are reported).
pub fn population_stats(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
    (mean, std)
}

/// Returns of a batch of evaluation episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalSummary {
    pub mean: f64,
    pub std: f64,
    pub returns: Vec<f64>,
}

impl EvalSummary {
    fn from_returns(returns: Vec<f64>) -> Self {
        let (mean, std) = population_stats(&returns);
        EvalSummary { mean, std, returns }
    }
}

/// Runs the deterministic policy for `episodes` episodes on a fresh
/// dense-reward environment and returns the full trajectories. Episode seeds
/// derive from `seed` alone, so repeated calls replay the same episodes.
pub fn record_demos(
    core: &SacCore,
    env_name: &str,
    episodes: u64,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if episodes == 0 {
        return Err(Error::Config(
            "evaluation needs at least one episode".into(),
        ));
    }
    let mut env = make_env(env_name, false)?;
    let mut rng = seeded(seed, Stream::Eval);
    let mut trajectories = Vec::with_capacity(episodes as usize);
    for _ in 0..episodes {
        let mut state = env.reset(rng.next_u64());
        let mut transitions = Vec::new();
        loop {
            let action = core.deterministic_action(&state)?;
            let scaled = rescale_action(env.spec(), &action)?;
            let step = env.step(&scaled)?;
            let previous = std::mem::replace(&mut state, step.next_state.clone());
            transitions.push(Transition {
                state: previous,
                action,
                reward_env: step.reward,
                next_state: step.next_state,
                terminated: step.terminated,
                truncated: step.truncated,
            });
            if step.terminated || step.truncated {
                break;
            }
        }
        trajectories.push(Trajectory::new(transitions)?);
    }
    Ok(trajectories)
}

/// Deterministic-policy evaluation: mean and spread of episodic returns on
/// the dense-reward environment. Training in episodic mode changes nothing
/// here — the wrapped return equals the dense sum by construction.
pub fn evaluate(core: &SacCore, env_name: &str, episodes: u64, seed: u64) -> Result<EvalSummary> {
    let trajectories = record_demos(core, env_name, episodes, seed)?;
    Ok(EvalSummary::from_returns(
        trajectories.iter().map(Trajectory::episodic_return).collect(),
    ))
}

/// What an untrained agent scores: uniform-random actions on the dense
/// environment. The floor that learning curves are judged against.
pub fn random_policy_baseline(env_name: &str, episodes: u64, seed: u64) -> Result<EvalSummary> {
    if episodes == 0 {
        return Err(Error::Config(
            "evaluation needs at least one episode".into(),
        ));
    }
    let mut env = make_env(env_name, false)?;
    let action_dim = env.spec().action_dim;
    let mut rng = seeded(seed, Stream::Eval);
    let mut returns = Vec::with_capacity(episodes as usize);
    for _ in 0..episodes {
        env.reset(rng.next_u64());
        let mut total = 0.0;
        loop {
            let action: Vec<f64> = (0..action_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scaled = rescale_action(env.spec(), &action)?;
            let step = env.step(&scaled)?;
            total += step.reward;
            if step.terminated || step.truncated {
                break;
            }
        }
        returns.push(total);
    }
    Ok(EvalSummary::from_returns(returns))
}

/// The state a finished run hands back: the metrics trail plus the trained
/// agent and its buffers, ready for inspection or demo recording.
#[derive(Debug, Clone)]
pub struct TrainResult {
    pub records: Vec<MetricsRecord>,
    pub core: SacCore,
    pub online: OnlineBuffer,
    pub expert: Option<ExpertBuffer>,
}

/// Runs one seeded training loop: collect one environment step, complete
/// episodes flow into the buffers, one gradient update per post-warmup step,
/// an evaluation every `eval_interval` steps.
pub fn train(config: &RunConfig) -> Result<TrainResult> {
    config.validate()?;
    let mut env = make_env(&config.env, config.episodic)?;
    let spec = env.spec().clone();

    let mut core_config = SacCoreConfig::new(spec.state_dim, spec.action_dim);
    core_config.hidden_dims = config.hidden_dims.clone();
    core_config.alpha = config.alpha;
    core_config.gamma = config.gamma;
    core_config.tau = config.tau;
    core_config.lr_actor = config.lr_actor;
    core_config.lr_critic = config.lr_critic;
    core_config.q_count = config.q_count;
    core_config.init_seed = config.seed;
    let mut core = SacCore::new(core_config)?;

    let mut online = OnlineBuffer::new(config.online_capacity)?;
    let mut expert = match config.agent {
        AgentKind::Silcr => Some(ExpertBuffer::new(config.expert_capacity)?),
        AgentKind::Sqil => Some(load_demo_buffer(config, &spec)?),
        AgentKind::Sac => None,
    };

    let mut env_rng = seeded(config.seed, Stream::Env);
    let mut policy_rng = seeded(config.seed, Stream::Policy);
    let mut buffer_rng = seeded(config.seed, Stream::Buffer);
    let mut eval_rng = seeded(config.seed, Stream::Eval);

    let mut metrics_writer = match &config.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            Some(metrics::MetricsWriter::create(
                dir.join("metrics.txt"),
                config.digest(),
                config.seed,
            )?)
        }
        None => None,
    };

    let started = Instant::now();
    let mut records = Vec::new();
    let mut pending: Vec<Transition> = Vec::new();
    let mut state = env.reset(env_rng.next_u64());
    let mut last_train_return = f64::NAN;
    let mut last_update: Option<UpdateMetrics> = None;

    for step in 1..=config.total_steps {
        let action: Vec<f64> = if step <= config.warmup_steps {
            (0..spec.action_dim)
                .map(|_| policy_rng.gen_range(-1.0..1.0))
                .collect()
        } else {
            core.sample_action(&state, &mut policy_rng)?
        };
        let scaled = rescale_action(&spec, &action)?;
        let outcome = env.step(&scaled)?;
        let previous = std::mem::replace(&mut state, outcome.next_state.clone());
        pending.push(Transition {
            state: previous,
            action,
            reward_env: outcome.reward,
            next_state: outcome.next_state,
            terminated: outcome.terminated,
            truncated: outcome.truncated,
        });

        if outcome.terminated || outcome.truncated {
            let trajectory = Trajectory::new(std::mem::take(&mut pending))?;
            last_train_return = trajectory.episodic_return();
            online.store_trajectory(&trajectory);
            if config.agent == AgentKind::Silcr {
                expert
                    .as_mut()
                    .expect("silcr always carries an expert buffer")
                    .offer(trajectory);
            }
            state = env.reset(env_rng.next_u64());
        }

        if step > config.warmup_steps {
            let result = if config.agent == AgentKind::Sac {
                core.update_dense(&online, config.batch_size, &mut buffer_rng, &mut policy_rng)
            } else {
                let demos = expert
                    .as_ref()
                    .expect("relabeling agents always carry an expert buffer");
                core.update_relabeled(
                    &online,
                    demos,
                    config.batch_size,
                    &mut buffer_rng,
                    &mut policy_rng,
                )
            };
            match result {
                Ok(update) => last_update = Some(update),
                // A buffer with nothing in it yet is not an error: keep
                // collecting and try again next step.
                Err(Error::NotReady(_)) => {}
                Err(other) => return Err(other),
            }
        }

        if step % config.eval_interval == 0 {
            let summary = evaluate(&core, &config.env, config.eval_episodes, eval_rng.next_u64())?;
            records.push(MetricsRecord {
                env_step: step,
                return_train: last_train_return,
                return_eval: summary.mean,
                q_loss: last_update.map_or(f64::NAN, |u| u.q_loss),
                policy_loss: last_update.map_or(f64::NAN, |u| u.policy_loss),
                expert_min: expert
                    .as_ref()
                    .and_then(ExpertBuffer::min_return)
                    .unwrap_or(f64::NAN),
                expert_max: expert
                    .as_ref()
                    .and_then(ExpertBuffer::max_return)
                    .unwrap_or(f64::NAN),
                wall_time: started.elapsed().as_secs_f64(),
            });
            if let Some(writer) = &mut metrics_writer {
                writer.append(records.last().expect("a record was just pushed"))?;
            }
        }
    }

    // A half-finished episode still happened: its transitions belong in the
    // online buffer (never the expert buffer, which ranks whole episodes).
    if !pending.is_empty() {
        online.store_transitions(&pending);
    }

    if let Some(dir) = &config.out_dir {
        let checkpoint = TrainCheckpoint {
            core: core.clone(),
            env_step: config.total_steps,
            env_rng: RngSnapshot::capture(&env_rng),
            policy_rng: RngSnapshot::capture(&policy_rng),
            buffer_rng: RngSnapshot::capture(&buffer_rng),
            eval_rng: RngSnapshot::capture(&eval_rng),
        };
        checkpoint.save(dir.join("final.ckpt"))?;
    }

    Ok(TrainResult {
        records,
        core,
        online,
        expert,
    })
}

fn load_demo_buffer(config: &RunConfig, spec: &EnvSpec) -> Result<ExpertBuffer> {
    let path = config
        .demo_path
        .as_ref()
        .expect("validate requires a demo path for sqil");
    let demos = read_demos(path)?;
    for trajectory in &demos {
        let first = &trajectory.transitions()[0];
        if first.state.len() != spec.state_dim || first.action.len() != spec.action_dim {
            return Err(Error::Config(format!(
                "demos carry {} state / {} action dims but {} expects {} / {}",
                first.state.len(),
                first.action.len(),
                spec.name,
                spec.state_dim,
                spec.action_dim
            )));
        }
    }
    ExpertBuffer::from_trajectories(demos)
}

/// One ablation arm: a full training run at one expert-buffer capacity.
#[derive(Debug, Clone)]
pub struct AblationArm {
    pub expert_capacity: usize,
    pub result: TrainResult,
}

/// Reruns `base` once per capacity, identical in every other respect. With an
/// output directory set, each arm writes into an `expert<capacity>`
/// subdirectory so the files never collide.
pub fn run_ablation(base: &RunConfig, expert_capacities: &[usize]) -> Result<Vec<AblationArm>> {
    if expert_capacities.is_empty() {
        return Err(Error::Config(
            "ablation needs at least one expert capacity".into(),
        ));
    }
    let mut arms = Vec::with_capacity(expert_capacities.len());
    for &expert_capacity in expert_capacities {
        let mut config = base.clone();
        config.expert_capacity = expert_capacity;
        config.out_dir = base
            .out_dir
            .as_ref()
            .map(|dir| dir.join(format!("expert{expert_capacity}")));
        arms.push(AblationArm {
            expert_capacity,
            result: train(&config)?,
        });
    }
    Ok(arms)
}
