//! The actor-critic core shared by every agent in the toolkit, plus the two
//! update flavors built on it.
//!
//! All three agents are the same soft actor-critic machinery fed different
//! batches: SILCR and SQIL train on half-online/half-expert batches with
//! rewards relabeled to the constants 0 and 1, differing only in where the
//! expert buffer's contents come from (self-collected top trajectories vs
//! recorded demonstrations); the SAC baseline trains on online batches
//! carrying the environment's own rewards.

mod checkpoint;

pub use checkpoint::TrainCheckpoint;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{adam_step, polyak_update, AdamState, GradientBundle, MlpParameters};
use crate::policy::{standard_normal_vec, SquashedGaussian, LOG_STD_MAX, LOG_STD_MIN};
use crate::replay::{make_training_batch, ExpertBuffer, OnlineBuffer, TrainingSample};
use crate::rng::derive_seed;

/// Which training recipe a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentKind {
    Silcr,
    Sac,
    Sqil,
}

impl AgentKind {
    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Silcr => "silcr",
            AgentKind::Sac => "sac",
            AgentKind::Sqil => "sqil",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "silcr" => Ok(AgentKind::Silcr),
            "sac" => Ok(AgentKind::Sac),
            "sqil" => Ok(AgentKind::Sqil),
            other => Err(Error::Config(format!(
                "unknown agent {other:?}; valid agents are silcr, sac, sqil"
            ))),
        }
    }
}

/// Everything needed to build a [`SacCore`]. `init_seed` determines every
/// initial weight; two cores built from equal configs are identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SacCoreConfig {
    pub state_dim: usize,
    pub action_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub alpha: f64,
    pub gamma: f64,
    pub tau: f64,
    pub lr_actor: f64,
    pub lr_critic: f64,
    /// 1 trains a single critic; 2 trains twins with min-backup.
    pub q_count: usize,
    pub init_seed: u64,
}

impl SacCoreConfig {
    pub fn new(state_dim: usize, action_dim: usize) -> Self {
        SacCoreConfig {
            state_dim,
            action_dim,
            hidden_dims: vec![800, 400],
            alpha: 0.2,
            gamma: 0.99,
            tau: 0.05,
            lr_actor: 3e-4,
            lr_critic: 3e-4,
            q_count: 2,
            init_seed: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.state_dim == 0 || self.action_dim == 0 {
            return Err(Error::Config(
                "state and action dimensions must be at least 1".into(),
            ));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!(
                "entropy temperature must be finite and non-negative, got {}",
                self.alpha
            )));
        }
        if !(self.gamma.is_finite() && (0.0..=1.0).contains(&self.gamma)) {
            return Err(Error::Config(format!(
                "discount must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.tau.is_finite() && (0.0..=1.0).contains(&self.tau)) {
            return Err(Error::Config(format!(
                "target step size must lie in [0, 1], got {}",
                self.tau
            )));
        }
        for (name, lr) in [("actor", self.lr_actor), ("critic", self.lr_critic)] {
            if !(lr.is_finite() && lr >= 0.0) {
                return Err(Error::Config(format!(
                    "{name} learning rate must be finite and non-negative, got {lr}"
                )));
            }
        }
        if !(self.q_count == 1 || self.q_count == 2) {
            return Err(Error::Config(format!(
                "q_count must be 1 or 2, got {}",
                self.q_count
            )));
        }
        Ok(())
    }
}

/// Scalar losses from one update, for logging.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateMetrics {
    pub q_loss: f64,
    pub policy_loss: f64,
}

/// Per-critic losses and gradients for one batch against fixed targets.
#[derive(Debug, Clone)]
pub struct QLossOutput {
    pub q1_loss: f64,
    /// NaN when only one critic is active.
    pub q2_loss: f64,
    pub q1_grads: GradientBundle,
    pub q2_grads: GradientBundle,
}

/// Policy, critics, their slow-moving targets, and one optimizer per trained
/// network.
#[derive(Debug, Clone)]
pub struct SacCore {
    pub(crate) config: SacCoreConfig,
    pub(crate) policy: MlpParameters,
    pub(crate) q1: MlpParameters,
    pub(crate) q2: MlpParameters,
    pub(crate) q1_target: MlpParameters,
    pub(crate) q2_target: MlpParameters,
    pub(crate) policy_opt: AdamState,
    pub(crate) q1_opt: AdamState,
    pub(crate) q2_opt: AdamState,
}

impl SacCore {
    pub fn new(config: SacCoreConfig) -> Result<Self> {
        config.validate()?;

        let mut policy_dims = vec![config.state_dim];
        policy_dims.extend_from_slice(&config.hidden_dims);
        policy_dims.push(2 * config.action_dim);
        let mut q_dims = vec![config.state_dim + config.action_dim];
        q_dims.extend_from_slice(&config.hidden_dims);
        q_dims.push(1);

        let policy = MlpParameters::init(&policy_dims, derive_seed(config.init_seed, 0))?;
        let q1 = MlpParameters::init(&q_dims, derive_seed(config.init_seed, 1))?;
        let q2 = MlpParameters::init(&q_dims, derive_seed(config.init_seed, 2))?;
        let q1_target = q1.clone();
        let q2_target = q2.clone();
        let policy_opt = AdamState::new(&policy);
        let q1_opt = AdamState::new(&q1);
        let q2_opt = AdamState::new(&q2);

        Ok(SacCore {
            config,
            policy,
            q1,
            q2,
            q1_target,
            q2_target,
            policy_opt,
            q1_opt,
            q2_opt,
        })
    }

    pub fn config(&self) -> &SacCoreConfig {
        &self.config
    }

    pub fn alpha(&self) -> f64 {
        self.config.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.config.gamma
    }

    pub fn tau(&self) -> f64 {
        self.config.tau
    }

    pub fn q_count(&self) -> usize {
        self.config.q_count
    }

    pub fn state_dim(&self) -> usize {
        self.config.state_dim
    }

    pub fn action_dim(&self) -> usize {
        self.config.action_dim
    }

    pub fn policy_net(&self) -> &MlpParameters {
        &self.policy
    }

    pub fn q1_net(&self) -> &MlpParameters {
        &self.q1
    }

    pub fn q2_net(&self) -> &MlpParameters {
        &self.q2
    }

    pub fn q1_target_net(&self) -> &MlpParameters {
        &self.q1_target
    }

    pub fn q2_target_net(&self) -> &MlpParameters {
        &self.q2_target
    }

    /// Direct weight access, for custom initialization and diagnostics. The
    /// optimizer state is not adjusted; callers changing shapes will get shape
    /// errors on the next update.
    pub fn policy_net_mut(&mut self) -> &mut MlpParameters {
        &mut self.policy
    }

    pub fn q1_net_mut(&mut self) -> &mut MlpParameters {
        &mut self.q1
    }

    pub fn q2_net_mut(&mut self) -> &mut MlpParameters {
        &mut self.q2
    }

    pub fn q1_target_net_mut(&mut self) -> &mut MlpParameters {
        &mut self.q1_target
    }

    pub fn q2_target_net_mut(&mut self) -> &mut MlpParameters {
        &mut self.q2_target
    }

    /// Exchanges the two critics wholesale (networks, targets, optimizer
    /// states). With min-backup the ordering of the twins is arbitrary; this
    /// exists to verify nothing depends on it.
    pub fn swap_q_networks(&mut self) {
        std::mem::swap(&mut self.q1, &mut self.q2);
        std::mem::swap(&mut self.q1_target, &mut self.q2_target);
        std::mem::swap(&mut self.q1_opt, &mut self.q2_opt);
    }

    /// The policy head's distribution at `state`, plus the forward cache and
    /// the pass-through gates for the log_std clamp (0 where the raw head
    /// output left the legal range and the clamp kills the gradient).
    fn policy_head(
        &self,
        state: &[f64],
    ) -> Result<(SquashedGaussian, crate::nn::ForwardCache, Vec<f64>)> {
        let (head, cache) = self.policy.forward(state)?;
        let dist = SquashedGaussian::from_head_output(&head)?;
        let gates = head[self.config.action_dim..]
            .iter()
            .map(|&raw| {
                if (LOG_STD_MIN..=LOG_STD_MAX).contains(&raw) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        Ok((dist, cache, gates))
    }

    /// One stochastic action for rollouts.
    pub fn sample_action<R: Rng>(&self, state: &[f64], rng: &mut R) -> Result<Vec<f64>> {
        let (dist, _, _) = self.policy_head(state)?;
        let noise = standard_normal_vec(rng, self.config.action_dim);
        Ok(dist.sample(&noise)?.action)
    }

    /// The exploitation action used by evaluation.
    pub fn deterministic_action(&self, state: &[f64]) -> Result<Vec<f64>> {
        let (dist, _, _) = self.policy_head(state)?;
        Ok(dist.deterministic_action())
    }

    fn q_input(&self, state: &[f64], action: &[f64]) -> Vec<f64> {
        let mut input = Vec::with_capacity(state.len() + action.len());
        input.extend_from_slice(state);
        input.extend_from_slice(action);
        input
    }

    fn min_target_q(&self, input: &[f64]) -> Result<f64> {
        let q1 = self.q1_target.forward(input)?.0[0];
        if self.config.q_count == 1 {
            return Ok(q1);
        }
        let q2 = self.q2_target.forward(input)?.0[0];
        Ok(if q2 < q1 { q2 } else { q1 })
    }

    /// Critic regression targets, drawing one next-action noise per transition.
    pub fn compute_q_targets<R: Rng>(
        &self,
        batch: &[TrainingSample],
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        let noises: Vec<Vec<f64>> = batch
            .iter()
            .map(|_| standard_normal_vec(rng, self.config.action_dim))
            .collect();
        self.compute_q_targets_given_noise(batch, &noises)
    }

    /// Same as [`SacCore::compute_q_targets`] with the noise supplied, so the
    /// computation can be replayed exactly.
    ///
    /// For each transition: `y = r + gamma * mask * (min Q_target(s', a') -
    /// alpha * log pi(a'|s'))` with `a'` the squashed sample at `s'` and
    /// mask = 0 only on termination — timeouts still bootstrap. Nothing here
    /// reads the online critics, so no gradient can leak through `y`.
    pub fn compute_q_targets_given_noise(
        &self,
        batch: &[TrainingSample],
        noises: &[Vec<f64>],
    ) -> Result<Vec<f64>> {
        if batch.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        if noises.len() != batch.len() {
            return Err(Error::Shape(format!(
                "{} noise vectors for {} transitions",
                noises.len(),
                batch.len()
            )));
        }

        let mut targets = Vec::with_capacity(batch.len());
        for (sample, noise) in batch.iter().zip(noises) {
            if sample.terminated {
                targets.push(sample.reward);
                continue;
            }
            let (dist, _, _) = self.policy_head(&sample.next_state)?;
            let drawn = dist.sample(noise)?;
            let input = self.q_input(&sample.next_state, &drawn.action);
            let q_min = self.min_target_q(&input)?;
            targets.push(
                sample.reward
                    + self.config.gamma * (q_min - self.config.alpha * drawn.log_prob),
            );
        }
        Ok(targets)
    }

    /// Mean squared Bellman residual `mean(1/2 (Q(s,a) - y)^2)` per critic,
    /// with gradients. Targets are taken as given constants.
    pub fn q_loss(&self, batch: &[TrainingSample], targets: &[f64]) -> Result<QLossOutput> {
        if batch.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        if targets.len() != batch.len() {
            return Err(Error::Shape(format!(
                "{} targets for {} transitions",
                targets.len(),
                batch.len()
            )));
        }
        if targets.iter().any(|y| !y.is_finite()) {
            return Err(Error::Numerical("non-finite critic target".into()));
        }

        let n = batch.len() as f64;
        let mut out = QLossOutput {
            q1_loss: 0.0,
            q2_loss: if self.config.q_count == 2 { 0.0 } else { f64::NAN },
            q1_grads: GradientBundle::zeros_like(&self.q1),
            q2_grads: GradientBundle::zeros_like(&self.q2),
        };

        for (sample, &y) in batch.iter().zip(targets) {
            let input = self.q_input(&sample.state, &sample.action);
            let (value, cache) = self.q1.forward(&input)?;
            let residual = value[0] - y;
            out.q1_loss += 0.5 * residual * residual / n;
            self.q1
                .backward_accumulate(&cache, &[residual / n], &mut out.q1_grads)?;

            if self.config.q_count == 2 {
                let (value, cache) = self.q2.forward(&input)?;
                let residual = value[0] - y;
                out.q2_loss += 0.5 * residual * residual / n;
                self.q2
                    .backward_accumulate(&cache, &[residual / n], &mut out.q2_grads)?;
            }
        }
        Ok(out)
    }

    /// Actor objective `mean(alpha * log pi(a|s) - min Q(s, a))` with `a`
    /// reparameterized, and its gradient for the policy parameters.
    pub fn policy_loss<R: Rng>(
        &self,
        states: &[Vec<f64>],
        rng: &mut R,
    ) -> Result<(f64, GradientBundle)> {
        let noises: Vec<Vec<f64>> = states
            .iter()
            .map(|_| standard_normal_vec(rng, self.config.action_dim))
            .collect();
        self.policy_loss_given_noise(states, &noises)
    }

    /// Same as [`SacCore::policy_loss`] with the noise supplied.
    pub fn policy_loss_given_noise(
        &self,
        states: &[Vec<f64>],
        noises: &[Vec<f64>],
    ) -> Result<(f64, GradientBundle)> {
        if states.is_empty() {
            return Err(Error::Input("empty batch".into()));
        }
        if noises.len() != states.len() {
            return Err(Error::Shape(format!(
                "{} noise vectors for {} states",
                noises.len(),
                states.len()
            )));
        }

        let n = states.len() as f64;
        let alpha = self.config.alpha;
        let d = self.config.action_dim;
        let mut loss = 0.0;
        let mut grads = GradientBundle::zeros_like(&self.policy);
        // The critics' own gradients are discarded here; only their input
        // gradient (dQ/da) feeds the chain rule. One scratch bundle absorbs
        // the unused accumulation.
        let mut scratch = GradientBundle::zeros_like(&self.q1);

        for (state, noise) in states.iter().zip(noises) {
            let (dist, cache, gates) = self.policy_head(state)?;
            let drawn = dist.sample(noise)?;
            let input = self.q_input(state, &drawn.action);

            let q1 = self.q1.forward(&input)?;
            let (q_min, active) = if self.config.q_count == 2 {
                let q2 = self.q2.forward(&input)?;
                if q2.0[0] < q1.0[0] {
                    (q2, &self.q2)
                } else {
                    (q1, &self.q1)
                }
            } else {
                (q1, &self.q1)
            };
            loss += (alpha * drawn.log_prob - q_min.0[0]) / n;

            let dq_dinput = active.backward_accumulate(&q_min.1, &[1.0], &mut scratch)?;
            let dq_da = &dq_dinput[state.len()..];

            let mut head_grad = vec![0.0; 2 * d];
            for j in 0..d {
                head_grad[j] =
                    (alpha * drawn.dlogp_dmean[j] - dq_da[j] * drawn.daction_dmean[j]) / n;
                head_grad[d + j] = (alpha * drawn.dlogp_dlogstd[j]
                    - dq_da[j] * drawn.daction_dlogstd[j])
                    * gates[j]
                    / n;
            }
            self.policy.backward_accumulate(&cache, &head_grad, &mut grads)?;
        }
        Ok((loss, grads))
    }

    /// One full update on an already-assembled batch: critics, then actor,
    /// then target tracking. Returns the pre-step loss values.
    pub fn update_from_batch<R: Rng>(
        &mut self,
        batch: &[TrainingSample],
        rng: &mut R,
    ) -> Result<UpdateMetrics> {
        let targets = self.compute_q_targets(batch, rng)?;
        let q_out = self.q_loss(batch, &targets)?;
        adam_step(
            &mut self.q1,
            &q_out.q1_grads,
            &mut self.q1_opt,
            self.config.lr_critic,
        )?;
        if self.config.q_count == 2 {
            adam_step(
                &mut self.q2,
                &q_out.q2_grads,
                &mut self.q2_opt,
                self.config.lr_critic,
            )?;
        }

        let states: Vec<Vec<f64>> = batch.iter().map(|s| s.state.clone()).collect();
        let (policy_loss, policy_grads) = self.policy_loss(&states, rng)?;
        adam_step(
            &mut self.policy,
            &policy_grads,
            &mut self.policy_opt,
            self.config.lr_actor,
        )?;

        polyak_update(&mut self.q1_target, &self.q1, self.config.tau)?;
        if self.config.q_count == 2 {
            polyak_update(&mut self.q2_target, &self.q2, self.config.tau)?;
        }

        let q_loss = if self.config.q_count == 2 {
            (q_out.q1_loss + q_out.q2_loss) / 2.0
        } else {
            q_out.q1_loss
        };
        Ok(UpdateMetrics { q_loss, policy_loss })
    }

    /// The half-online/half-expert update used by SILCR and SQIL: rewards are
    /// the relabeling constants, not the environment's.
    pub fn update_relabeled<R1: Rng, R2: Rng>(
        &mut self,
        online: &OnlineBuffer,
        expert: &ExpertBuffer,
        batch_size: usize,
        buffer_rng: &mut R1,
        policy_rng: &mut R2,
    ) -> Result<UpdateMetrics> {
        let batch = make_training_batch(online, expert, batch_size, buffer_rng)?;
        self.update_from_batch(&batch, policy_rng)
    }

    /// The plain baseline update: online transitions with their true rewards.
    pub fn update_dense<R1: Rng, R2: Rng>(
        &mut self,
        online: &OnlineBuffer,
        batch_size: usize,
        buffer_rng: &mut R1,
        policy_rng: &mut R2,
    ) -> Result<UpdateMetrics> {
        if batch_size == 0 {
            return Err(Error::Config("batch size must be positive".into()));
        }
        let batch = online.sample_env_reward(batch_size, buffer_rng)?;
        self.update_from_batch(&batch, policy_rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation_rejects_bad_scalars() {
        let cases: Vec<Box<dyn Fn(&mut SacCoreConfig)>> = vec![
            Box::new(|c| c.state_dim = 0),
            Box::new(|c| c.alpha = -0.1),
            Box::new(|c| c.gamma = 1.5),
            Box::new(|c| c.tau = f64::NAN),
            Box::new(|c| c.lr_actor = -1.0),
            Box::new(|c| c.q_count = 3),
        ];
        for broken in cases {
            let mut cfg = SacCoreConfig::new(2, 1);
            broken(&mut cfg);
            assert!(SacCore::new(cfg).is_err());
        }
    }

    #[test]
    fn same_seed_builds_identical_cores() {
        let mut cfg = SacCoreConfig::new(3, 2);
        cfg.hidden_dims = vec![16];
        cfg.init_seed = 9;
        let a = SacCore::new(cfg.clone()).unwrap();
        let b = SacCore::new(cfg.clone()).unwrap();
        for i in 0..a.policy_net().param_count() {
            assert_eq!(a.policy_net().flat_get(i), b.policy_net().flat_get(i));
        }
        cfg.init_seed = 10;
        let c = SacCore::new(cfg).unwrap();
        let differs = (0..a.policy_net().param_count())
            .any(|i| a.policy_net().flat_get(i) != c.policy_net().flat_get(i));
        assert!(differs);
    }

    #[test]
    fn targets_start_as_copies_of_the_critics() {
        let core = SacCore::new(SacCoreConfig::new(2, 1)).unwrap();
        for i in 0..core.q1_net().param_count() {
            assert_eq!(core.q1_net().flat_get(i), core.q1_target_net().flat_get(i));
            assert_eq!(core.q2_net().flat_get(i), core.q2_target_net().flat_get(i));
        }
    }

    #[test]
    fn policy_and_critic_shapes_follow_the_dims() {
        let mut cfg = SacCoreConfig::new(5, 3);
        cfg.hidden_dims = vec![7, 4];
        let core = SacCore::new(cfg).unwrap();
        assert_eq!(core.policy_net().layer_dims(), &[5, 7, 4, 6]);
        assert_eq!(core.q1_net().layer_dims(), &[8, 7, 4, 1]);
    }
}
