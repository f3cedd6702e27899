use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AgentError, PolicyDistribution};
use crate::env::{Action, Env};
use crate::neural::{NetworkParams, RecurrentState};

/// Anything that picks an action from the current environment state.
pub trait Policy {
    fn name(&self) -> &str;

    /// Clears per-episode memory.
    fn begin_episode(&mut self) {}

    fn act(&mut self, env: &Env, rng: &mut ChaCha8Rng) -> Result<Action, AgentError>;
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionMode {
    /// Mode of every head.
    #[default]
    Greedy,
    Sampled,
}

/// Recurrent actor driven by trained network weights.
#[derive(Debug, Clone)]
pub struct AdaptivePolicy {
    params: NetworkParams,
    state: RecurrentState,
    mode: ActionMode,
}

impl AdaptivePolicy {
    pub fn new(params: NetworkParams, mode: ActionMode) -> Self {
        let state = params.initial_state();
        Self {
            params,
            state,
            mode,
        }
    }

    pub fn params(&self) -> &NetworkParams {
        &self.params
    }

    /// Runs the network one step and returns the action distribution and the
    /// critic's value.
    pub fn distribution(&mut self, env: &Env) -> Result<(PolicyDistribution, f64), AgentError> {
        let obs = env.observation();
        let out = self.params.step(&obs, &mut self.state)?;
        let dist = PolicyDistribution::from_actor_output(&out.actor, &env.feasible_mask())?;
        if dist.n_users() != env.params().n_users {
            return Err(AgentError::Dimension(format!(
                "network emits {} provisioning logits for {} users",
                dist.n_users(),
                env.params().n_users
            )));
        }
        Ok((dist, out.value))
    }
}

impl Policy for AdaptivePolicy {
    fn name(&self) -> &str {
        "adaptive"
    }

    fn begin_episode(&mut self) {
        self.state = self.params.initial_state();
    }

    fn act(&mut self, env: &Env, rng: &mut ChaCha8Rng) -> Result<Action, AgentError> {
        let (dist, _) = self.distribution(env)?;
        Ok(match self.mode {
            ActionMode::Greedy => dist.mode(),
            ActionMode::Sampled => dist.sample(rng).0,
        })
    }
}
