use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::advantage::{compute_advantages, normalize_advantages};
use super::loss::{critic_loss_grad, ppo_clip_grad, ppo_clip_objective};
use super::{derive_seed, AgentError, PolicyDistribution};
use crate::env::{episode_objective, Action, EnvSpec};
use crate::neural::{
    clip_global_norm, Gradients, NetworkConfig, NetworkParams, NeuralError, Optimizer,
    OptimizerConfig, OutputGrad,
};

/// Per-step multiplier applied to the aggregate increment before returns
/// are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardWeighting {
    /// Raw increments; undiscounted returns then equal the final health stock.
    Increment,
    /// Increment at epoch `t` weighted by `T - t`, the number of epochs its
    /// health gain is counted in the objective. Undiscounted returns then
    /// equal the objective exactly.
    #[default]
    RemainingHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PpoConfig {
    pub clip_epsilon: f64,
    pub discount: f64,
    pub gae_lambda: f64,
    pub epochs_per_batch: usize,
    /// Episodes per gradient step.
    pub minibatch_episodes: usize,
    pub episodes_per_batch: usize,
    pub batches: usize,
    pub entropy_coef: f64,
    pub value_coef: f64,
    /// Learning rate for the shared trunk and the actor head.
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub max_grad_norm: f64,
    /// Stops the epochs of a batch once the approximate KL exceeds 1.5 times
    /// this value.
    pub target_kl: Option<f64>,
    pub normalize_advantages: bool,
    pub reward_weighting: RewardWeighting,
}

impl Default for PpoConfig {
    fn default() -> Self {
        Self {
            clip_epsilon: 0.2,
            discount: 1.0,
            gae_lambda: 1.0,
            epochs_per_batch: 4,
            minibatch_episodes: 4,
            episodes_per_batch: 16,
            batches: 200,
            entropy_coef: 0.01,
            value_coef: 0.5,
            actor_lr: 3e-4,
            critic_lr: 1e-3,
            max_grad_norm: 0.5,
            target_kl: None,
            normalize_advantages: true,
            reward_weighting: RewardWeighting::RemainingHorizon,
        }
    }
}

impl PpoConfig {
    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: &str| Err(AgentError::InvalidConfig(m.to_string()));
        if !(self.clip_epsilon > 0.0 && self.clip_epsilon < 1.0) {
            return bad("clip_epsilon must lie in (0, 1)");
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return bad("discount must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.gae_lambda) {
            return bad("gae_lambda must lie in [0, 1]");
        }
        if self.epochs_per_batch == 0
            || self.minibatch_episodes == 0
            || self.episodes_per_batch == 0
        {
            return bad(
                "epochs_per_batch, minibatch_episodes and episodes_per_batch must be positive",
            );
        }
        for (name, v) in [
            ("entropy_coef", self.entropy_coef),
            ("value_coef", self.value_coef),
            ("actor_lr", self.actor_lr),
            ("critic_lr", self.critic_lr),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(AgentError::InvalidConfig(format!("{name} must be >= 0")));
            }
        }
        if !(self.max_grad_norm > 0.0) {
            return bad("max_grad_norm must be > 0");
        }
        if matches!(self.target_kl, Some(k) if !(k > 0.0)) {
            return bad("target_kl must be > 0");
        }
        Ok(())
    }
}

/// Network configuration matching an environment's observation and action
/// sizes, with default widths.
pub fn network_config_for(spec: &EnvSpec) -> NetworkConfig {
    let p = &spec.params;
    NetworkConfig::new(p.observation_len(), p.n_levels() + p.n_users)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub batch: usize,
    /// Mean objective of the sampled rollouts in this batch.
    pub mean_objective: f64,
    pub actor_loss: f64,
    pub critic_loss: f64,
    pub entropy: f64,
    pub approx_kl: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub params: NetworkParams,
    pub curve: Vec<CurveRow>,
    /// Divisor applied to weighted rewards, fixed after the first batch.
    pub return_scale: f64,
}

struct Rollout {
    obs: Vec<Vec<f64>>,
    masks: Vec<Vec<bool>>,
    actions: Vec<Action>,
    logp: Vec<f64>,
    values: Vec<f64>,
    rewards: Vec<f64>,
    objective: f64,
}

/// One recorded episode with everything a PPO update needs.
#[derive(Debug, Clone, PartialEq)]
pub struct PpoSample {
    pub obs: Vec<Vec<f64>>,
    pub masks: Vec<Vec<bool>>,
    pub actions: Vec<Action>,
    /// Log-probabilities under the policy that collected the episode.
    pub old_log_probs: Vec<f64>,
    pub advantages: Vec<f64>,
    pub value_targets: Vec<f64>,
}

/// Per-sample means of the PPO loss terms.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PpoLoss {
    /// `actor + value_coef * critic - entropy_coef * entropy`; the quantity
    /// whose gradient [`ppo_loss`] returns.
    pub total: f64,
    /// Negated clipped surrogate.
    pub actor: f64,
    pub critic: f64,
    pub entropy: f64,
    /// Mean of `old_log_prob - log_prob`.
    pub approx_kl: f64,
    pub samples: usize,
}

/// Combined PPO-Clip, critic and entropy loss over a set of episodes and its
/// gradient with respect to every network parameter.
pub fn ppo_loss<'a>(
    params: &NetworkParams,
    samples: impl IntoIterator<Item = &'a PpoSample>,
    cfg: &PpoConfig,
) -> Result<(PpoLoss, Gradients), AgentError> {
    let samples: Vec<&PpoSample> = samples.into_iter().collect();
    let n_samples: usize = samples.iter().map(|s| s.obs.len()).sum();
    if n_samples == 0 {
        return Err(AgentError::EmptyTrajectory);
    }
    let inv = 1.0 / n_samples as f64;
    let mut grads = params.zero_grads();
    let mut loss = PpoLoss {
        samples: n_samples,
        ..PpoLoss::default()
    };
    for s in samples {
        let t_len = s.obs.len();
        if [
            s.masks.len(),
            s.actions.len(),
            s.old_log_probs.len(),
            s.advantages.len(),
            s.value_targets.len(),
        ]
        .iter()
        .any(|&l| l != t_len)
        {
            return Err(AgentError::Dimension(
                "sample fields differ in length".into(),
            ));
        }
        let (outs, trace) = params.forward_sequence(&s.obs)?;
        let mut ogs = Vec::with_capacity(t_len);
        for (t, out) in outs.iter().enumerate() {
            let dist = PolicyDistribution::from_actor_output(&out.actor, &s.masks[t])?;
            let lp = dist.log_prob(&s.actions[t])?;
            let (old, adv, target) = (s.old_log_probs[t], s.advantages[t], s.value_targets[t]);
            let term = ppo_clip_objective(lp, old, adv, cfg.clip_epsilon)?;
            let g = ppo_clip_grad(lp, old, adv, cfg.clip_epsilon)?;
            let glp = dist.grad_log_prob(&s.actions[t])?;
            let gent = dist.grad_entropy();
            let actor: Vec<f64> = glp
                .iter()
                .zip(&gent)
                .map(|(a, e)| -(g * a + cfg.entropy_coef * e) * inv)
                .collect();
            ogs.push(OutputGrad {
                actor,
                value: cfg.value_coef * critic_loss_grad(target, out.value) * inv,
            });
            loss.actor -= term * inv;
            loss.critic += (out.value - target).powi(2) * inv;
            loss.entropy += dist.entropy() * inv;
            loss.approx_kl += (old - lp) * inv;
        }
        params.backward_sequence(&trace, &ogs, &mut grads)?;
    }
    loss.total = loss.actor + cfg.value_coef * loss.critic - cfg.entropy_coef * loss.entropy;
    Ok((loss, grads))
}

fn collect(
    params: &NetworkParams,
    spec: &EnvSpec,
    env_seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Rollout, AgentError> {
    let mut env = spec.build(env_seed)?;
    let horizon = spec.params.horizon;
    let mut state = params.initial_state();
    let mut r = Rollout {
        obs: Vec::with_capacity(horizon),
        masks: Vec::with_capacity(horizon),
        actions: Vec::with_capacity(horizon),
        logp: Vec::with_capacity(horizon),
        values: Vec::with_capacity(horizon),
        rewards: Vec::with_capacity(horizon),
        objective: 0.0,
    };
    while !env.is_done() {
        let obs = env.observation();
        let mask = env.feasible_mask();
        let out = params.step(&obs, &mut state)?;
        let dist = PolicyDistribution::from_actor_output(&out.actor, &mask)?;
        let (action, lp) = dist.sample(rng);
        let step = env.step(&action)?;
        r.obs.push(obs);
        r.masks.push(mask);
        r.actions.push(action);
        r.logp.push(lp);
        r.values.push(out.value);
        r.rewards.push(step.reward);
    }
    r.objective = episode_objective(&r.rewards, horizon)?;
    Ok(r)
}

fn weighted(rewards: &[f64], weighting: RewardWeighting, scale: f64) -> Vec<f64> {
    let horizon = rewards.len();
    rewards
        .iter()
        .enumerate()
        .map(|(t, r)| {
            let w = match weighting {
                RewardWeighting::Increment => 1.0,
                RewardWeighting::RemainingHorizon => (horizon - t) as f64,
            };
            w * r / scale
        })
        .collect()
}

#[derive(Default)]
struct Stats {
    actor: f64,
    critic: f64,
    entropy: f64,
    samples: usize,
}

fn minibatch_step<'a>(
    params: &mut NetworkParams,
    chunk: impl IntoIterator<Item = &'a PpoSample>,
    cfg: &PpoConfig,
    actor_opt: &mut Optimizer,
    critic_opt: &mut Optimizer,
    stats: &mut Stats,
) -> Result<f64, AgentError> {
    let (loss, mut grads) = ppo_loss(params, chunk, cfg)?;
    let k = loss.samples as f64;
    stats.actor += loss.actor * k;
    stats.critic += loss.critic * k;
    stats.entropy += loss.entropy * k;
    stats.samples += loss.samples;
    if !grads.is_finite() {
        return Err(AgentError::NonFinite("gradient".into()));
    }
    clip_global_norm(&mut grads.values, cfg.max_grad_norm);
    let split = params.layout().critic_offset();
    actor_opt.update(&mut params.values[..split], &grads.values[..split])?;
    critic_opt.update(&mut params.values[split..], &grads.values[split..])?;
    Ok(loss.approx_kl)
}

/// PPO-Clip actor-critic training from a seeded initialization.
pub fn train(
    spec: &EnvSpec,
    network: &NetworkConfig,
    cfg: &PpoConfig,
    seed: u64,
) -> Result<TrainOutcome, AgentError> {
    let params = NetworkParams::init(network.clone(), derive_seed(seed, 0x1717, 0))?;
    train_from(spec, params, cfg, seed)
}

/// Like [`train`] but starting from existing weights.
pub fn train_from(
    spec: &EnvSpec,
    mut params: NetworkParams,
    cfg: &PpoConfig,
    seed: u64,
) -> Result<TrainOutcome, AgentError> {
    cfg.validate()?;
    spec.validate()?;
    let p = &spec.params;
    let net = params.config();
    if net.input_dim != p.observation_len() || net.actor_outputs != p.n_levels() + p.n_users {
        return Err(AgentError::Dimension(format!(
            "network ({} inputs, {} actor outputs) does not fit the environment ({}, {})",
            net.input_dim,
            net.actor_outputs,
            p.observation_len(),
            p.n_levels() + p.n_users
        )));
    }
    let split = params.layout().critic_offset();
    let mut actor_opt = Optimizer::new(OptimizerConfig::adam(cfg.actor_lr), split)?;
    let mut critic_opt =
        Optimizer::new(OptimizerConfig::adam(cfg.critic_lr), params.len() - split)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0x5A3B, 0));
    let mut return_scale = None;
    let mut curve = Vec::with_capacity(cfg.batches);

    for batch in 0..cfg.batches {
        let rollouts = (0..cfg.episodes_per_batch)
            .map(|e| {
                let env_seed =
                    derive_seed(seed, 0x7121, (batch * cfg.episodes_per_batch + e) as u64);
                collect(&params, spec, env_seed, &mut rng)
            })
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| match e {
                AgentError::NonFinite(_) | AgentError::Neural(NeuralError::NonFinite(_)) => {
                    AgentError::Divergence {
                        batch,
                        detail: e.to_string(),
                    }
                }
                other => other,
            })?;

        let scale = *return_scale.get_or_insert_with(|| {
            let mean = rollouts
                .iter()
                .map(|r| {
                    weighted(&r.rewards, cfg.reward_weighting, 1.0)
                        .iter()
                        .sum::<f64>()
                        .abs()
                })
                .sum::<f64>()
                / rollouts.len() as f64;
            if mean > 0.0 && mean.is_finite() {
                mean
            } else {
                1.0
            }
        });

        let mut samples = Vec::with_capacity(rollouts.len());
        let mut objectives = Vec::with_capacity(rollouts.len());
        for r in rollouts {
            let rw = weighted(&r.rewards, cfg.reward_weighting, scale);
            let (advantages, value_targets) =
                compute_advantages(&rw, &r.values, cfg.discount, cfg.gae_lambda)?;
            objectives.push(r.objective);
            samples.push(PpoSample {
                obs: r.obs,
                masks: r.masks,
                actions: r.actions,
                old_log_probs: r.logp,
                advantages,
                value_targets,
            });
        }
        if cfg.normalize_advantages {
            let mut all: Vec<f64> = samples
                .iter()
                .flat_map(|s| s.advantages.iter().copied())
                .collect();
            normalize_advantages(&mut all);
            let mut it = all.into_iter();
            for s in &mut samples {
                s.advantages
                    .iter_mut()
                    .for_each(|a| *a = it.next().unwrap_or(0.0));
            }
        }

        let mut stats = Stats::default();
        let mut last_kl = 0.0;
        let mut order: Vec<usize> = (0..samples.len()).collect();
        'epochs: for _ in 0..cfg.epochs_per_batch {
            order.shuffle(&mut rng);
            for chunk in order.chunks(cfg.minibatch_episodes) {
                let kl = minibatch_step(
                    &mut params,
                    chunk.iter().map(|&i| &samples[i]),
                    cfg,
                    &mut actor_opt,
                    &mut critic_opt,
                    &mut stats,
                )
                .map_err(|e| AgentError::Divergence {
                    batch,
                    detail: e.to_string(),
                })?;
                last_kl = kl;
                if matches!(cfg.target_kl, Some(target) if kl > 1.5 * target) {
                    break 'epochs;
                }
            }
        }

        let k = stats.samples.max(1) as f64;
        let row = CurveRow {
            batch,
            mean_objective: objectives.iter().sum::<f64>() / objectives.len() as f64,
            actor_loss: stats.actor / k,
            critic_loss: stats.critic / k,
            entropy: stats.entropy / k,
            approx_kl: last_kl,
        };
        if !(row.actor_loss.is_finite() && row.critic_loss.is_finite()) {
            return Err(AgentError::Divergence {
                batch,
                detail: format!(
                    "non-finite loss (actor {}, critic {})",
                    row.actor_loss, row.critic_loss
                ),
            });
        }
        log::debug!(
            "batch {batch}: objective {:.3} entropy {:.3} kl {:.5}",
            row.mean_objective,
            row.entropy,
            row.approx_kl
        );
        curve.push(row);
    }
    Ok(TrainOutcome {
        params,
        curve,
        return_scale: return_scale.unwrap_or(1.0),
    })
}
