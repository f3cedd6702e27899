use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{derive_seed, AgentError, Policy};
use crate::env::{episode_objective, Env, EnvSpec};

/// Outcome of one complete episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    /// Aggregate increment per step.
    pub rewards: Vec<f64>,
    /// Final health stock per user, i.e. each user's total reward.
    pub per_user: Vec<f64>,
    /// Health stock summed over users and epochs.
    pub objective: f64,
}

/// Plays one episode from `env.reset(env_seed)`.
pub fn run_episode(
    env: &mut Env,
    policy: &mut dyn Policy,
    env_seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<EpisodeResult, AgentError> {
    env.reset(env_seed);
    policy.begin_episode();
    let mut rewards = Vec::with_capacity(env.params().horizon);
    while !env.is_done() {
        let action = policy.act(env, rng)?;
        rewards.push(env.step(&action)?.reward);
    }
    let objective = episode_objective(&rewards, env.params().horizon)?;
    Ok(EpisodeResult {
        rewards,
        per_user: env.state().health.clone(),
        objective,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub episodes: usize,
    /// Mean total reward per user.
    pub per_user: Vec<f64>,
    /// Sum of `per_user`.
    pub aggregate: f64,
    pub mean_objective: f64,
    /// Sample standard deviation of the episode objective.
    pub std_objective: f64,
}

/// Environment seeds shared by every policy evaluated with the same `seed`,
/// so comparisons see identical engagement draws.
pub fn evaluation_seeds(seed: u64, episodes: usize) -> Vec<u64> {
    (0..episodes as u64)
        .map(|i| derive_seed(seed, 0xE7A1, i))
        .collect()
}

pub fn evaluate(
    policy: &mut dyn Policy,
    spec: &EnvSpec,
    episodes: usize,
    seed: u64,
) -> Result<EvaluationReport, AgentError> {
    if episodes == 0 {
        return Err(AgentError::InvalidConfig(
            "episodes must be positive".into(),
        ));
    }
    let mut env = spec.build(seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 0xAC75, 0));
    let n = spec.params.n_users;
    let mut per_user = vec![0.0; n];
    let mut objectives = Vec::with_capacity(episodes);
    for s in evaluation_seeds(seed, episodes) {
        let ep = run_episode(&mut env, policy, s, &mut rng)?;
        for (acc, v) in per_user.iter_mut().zip(&ep.per_user) {
            *acc += v;
        }
        objectives.push(ep.objective);
    }
    let k = episodes as f64;
    per_user.iter_mut().for_each(|v| *v /= k);
    let mean_objective = objectives.iter().sum::<f64>() / k;
    let std_objective = if episodes > 1 {
        (objectives
            .iter()
            .map(|o| (o - mean_objective).powi(2))
            .sum::<f64>()
            / (k - 1.0))
            .sqrt()
    } else {
        0.0
    };
    Ok(EvaluationReport {
        episodes,
        aggregate: per_user.iter().sum(),
        per_user,
        mean_objective,
        std_objective,
    })
}

/// `(adaptive - baseline) / baseline * 100`. Equal values give 0 even when
/// both are zero.
pub fn improvement_pct(adaptive: f64, baseline: f64) -> f64 {
    if adaptive == baseline {
        return 0.0;
    }
    (adaptive - baseline) / baseline * 100.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn improvement_examples() {
        let round2 = |v: f64| (v * 100.0).round() / 100.0;
        assert_eq!(round2(improvement_pct(42.3, 21.3)), 98.59);
        assert_eq!(round2(improvement_pct(42.3, 39.1)), 8.18);
        assert_eq!(improvement_pct(5.0, 5.0), 0.0);
        assert_eq!(improvement_pct(0.0, 0.0), 0.0);
    }
}
