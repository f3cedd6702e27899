//! PPO-Clip actor-critic for the service environment.
//!
//! The joint action (one capacity level plus one provisioning bit per user)
//! is factorized into a masked categorical and independent Bernoulli heads,
//! so joint log-probabilities stay exact without enumerating `m * 2^n`
//! actions.

mod advantage;
mod distribution;
mod evaluate;
mod loss;
mod policy;
mod trainer;

pub use advantage::{compute_advantages, normalize_advantages, returns_to_go};
pub use distribution::PolicyDistribution;
pub use evaluate::{
    evaluate, evaluation_seeds, improvement_pct, run_episode, EpisodeResult, EvaluationReport,
};
pub use loss::{critic_loss, critic_loss_grad, ppo_clip_grad, ppo_clip_objective};
pub use policy::{ActionMode, AdaptivePolicy, Policy};
pub use trainer::{
    network_config_for, ppo_loss, train, train_from, CurveRow, PpoConfig, PpoLoss, PpoSample,
    RewardWeighting, TrainOutcome,
};

use thiserror::Error;

use crate::env::EnvError;
use crate::neural::NeuralError;

#[derive(Debug, Error, PartialEq)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Neural(#[from] NeuralError),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("empty trajectory")]
    EmptyTrajectory,
    #[error("no feasible capacity level")]
    NoFeasibleAction,
    #[error("training diverged at batch {batch}: {detail}")]
    Divergence { batch: usize, detail: String },
}

/// Deterministic seed for item `index` of stream `stream` under `base`
/// (SplitMix64 finalizer over the combined words).
pub fn derive_seed(base: u64, stream: u64, index: u64) -> u64 {
    let mut z = base
        .wrapping_add(stream.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
