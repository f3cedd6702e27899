//! The service resource-management decision process.
//!
//! At each epoch the provider picks a capacity level and a provisioning mask.
//! Capacity is split equally among provisioned users; every provisioned user's
//! health stock grows by `x^alpha1 * q^alpha2`; the balance drops by
//! `beta * capacity`. Capacity levels whose cost exceeds the balance are
//! masked out, so the budget constraint holds by construction.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::behavior::{BehaviorError, Emulator, EXTRAS_CHANNELS};

/// Slack allowed when comparing a level's cost against the balance.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum EnvError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("infeasible action: capacity {capacity} costs {cost} but balance is {balance}")]
    Infeasible {
        capacity: f64,
        cost: f64,
        balance: f64,
    },
    #[error("malformed action: {0}")]
    MalformedAction(String),
    #[error("episode already finished")]
    EpisodeFinished,
    #[error("incomplete episode: {got} of {expected} steps")]
    IncompleteEpisode { got: usize, expected: usize },
    #[error(transparent)]
    Behavior(#[from] BehaviorError),
}

fn invalid(field: &'static str, reason: impl Into<String>) -> EnvError {
    EnvError::InvalidParams {
        field,
        reason: reason.into(),
    }
}

fn one() -> f64 {
    1.0
}

/// Static parameters of a service instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceParams {
    /// Output elasticity of user engagement.
    pub alpha1: f64,
    /// Output elasticity of perceived quality.
    pub alpha2: f64,
    /// Total operating budget.
    pub budget: f64,
    /// Cost per unit of capacity.
    pub beta: f64,
    /// Ascending capacity levels, including 0.
    pub capacity_levels: Vec<f64>,
    pub n_users: usize,
    /// Number of decision epochs.
    pub horizon: usize,
    /// Auxiliary indicator channels per user.
    pub n_extras: usize,
    #[serde(default = "one")]
    pub discount: f64,
}

impl ServiceParams {
    /// Sixteen users, a 30-epoch horizon, sixteen capacity levels 0..=15,
    /// `alpha = (0.5, 0.4)`, `B = 100`, `beta = 0.9`, four indicator channels.
    pub fn reference() -> Self {
        Self {
            alpha1: 0.5,
            alpha2: 0.4,
            budget: 100.0,
            beta: 0.9,
            capacity_levels: (0..16).map(f64::from).collect(),
            n_users: 16,
            horizon: 30,
            n_extras: 4,
            discount: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        let unit = |v: f64| v > 0.0 && v < 1.0;
        if !unit(self.alpha1) {
            return Err(invalid("alpha1", "must lie in (0, 1)"));
        }
        if !unit(self.alpha2) {
            return Err(invalid("alpha2", "must lie in (0, 1)"));
        }
        if self.alpha1 + self.alpha2 >= 1.0 {
            return Err(invalid("alpha1", "alpha1 + alpha2 must be < 1"));
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return Err(invalid("budget", "must be finite and >= 0"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(invalid("beta", "must be finite and > 0"));
        }
        let levels = &self.capacity_levels;
        if levels.len() < 2 {
            return Err(invalid("capacity_levels", "need at least two levels"));
        }
        if levels.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(invalid("capacity_levels", "levels must be finite and >= 0"));
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid(
                "capacity_levels",
                "levels must be strictly ascending",
            ));
        }
        if levels[0] != 0.0 {
            return Err(invalid("capacity_levels", "must contain 0"));
        }
        if self.n_users == 0 {
            return Err(invalid("n_users", "must be positive"));
        }
        if self.horizon == 0 {
            return Err(invalid("horizon", "must be positive"));
        }
        if !(self.discount > 0.0 && self.discount <= 1.0) {
            return Err(invalid("discount", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn n_levels(&self) -> usize {
        self.capacity_levels.len()
    }

    /// Length of the flattened observation: `xi*n + 2n + 2`.
    pub fn observation_len(&self) -> usize {
        self.n_extras * self.n_users + 2 * self.n_users + 2
    }

    /// Joint action count under full enumeration, `m * 2^n`.
    pub fn joint_action_count(&self) -> u128 {
        self.n_levels() as u128 * (1u128 << self.n_users.min(127))
    }

    /// Mask of capacity levels affordable with `balance`.
    pub fn feasible_levels(&self, balance: f64) -> Vec<bool> {
        self.capacity_levels
            .iter()
            .map(|c| self.beta * c <= balance + FEASIBILITY_TOLERANCE)
            .collect()
    }
}

/// Fixed scales used to encode observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationScale {
    pub engagement: f64,
    /// Health divisor; `None` derives `horizon * 10^alpha1 * max_level^alpha2`,
    /// the largest stock a single user can reach.
    pub health: Option<f64>,
    /// One divisor per auxiliary channel; defaults to the nominal channel scales.
    pub extras: Vec<f64>,
}

impl Default for ObservationScale {
    fn default() -> Self {
        Self {
            engagement: 10.0,
            health: None,
            extras: EXTRAS_CHANNELS.iter().map(|c| c.obs_scale).collect(),
        }
    }
}

impl ObservationScale {
    pub fn health_cap(&self, params: &ServiceParams) -> f64 {
        self.health.unwrap_or_else(|| {
            let max_level = *params.capacity_levels.last().unwrap_or(&1.0);
            let cap = params.horizon as f64
                * 10f64.powf(params.alpha1)
                * max_level.max(1.0).powf(params.alpha2);
            cap.max(1.0)
        })
    }
}

/// Full simulator state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub t: usize,
    pub balance: f64,
    pub engagement: Vec<f64>,
    pub health: Vec<f64>,
    /// `n_extras` rows of `n_users` values.
    pub extras: Vec<Vec<f64>>,
    pub budget_exhausted: bool,
}

/// Joint decision: a capacity level and a provisioning mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub capacity_index: usize,
    pub provision: Vec<bool>,
}

impl Action {
    pub fn new(capacity_index: usize, provision: Vec<bool>) -> Self {
        Self {
            capacity_index,
            provision,
        }
    }

    pub fn provide_all(capacity_index: usize, n: usize) -> Self {
        Self::new(capacity_index, vec![true; n])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub next_state: EnvState,
    /// Sum of this step's health increments.
    pub reward: f64,
    /// Per-user increments.
    pub increments: Vec<f64>,
    pub done: bool,
}

/// Capacity shared equally among provisioned users; 0 when nobody is served.
pub fn perceived_quality(capacity: f64, provision: &[bool]) -> f64 {
    let served = provision.iter().filter(|p| **p).count();
    if served == 0 {
        0.0
    } else {
        capacity / served as f64
    }
}

/// Health gained by one user this epoch.
pub fn health_increment(
    engagement: f64,
    provided: bool,
    quality: f64,
    params: &ServiceParams,
) -> f64 {
    if !provided {
        return 0.0;
    }
    engagement.powf(params.alpha1) * quality.powf(params.alpha2)
}

/// Balance after paying for `capacity`.
pub fn budget_update(balance: f64, capacity: f64, beta: f64) -> Result<f64, EnvError> {
    let cost = beta * capacity;
    if cost > balance + FEASIBILITY_TOLERANCE {
        return Err(EnvError::Infeasible {
            capacity,
            cost,
            balance,
        });
    }
    Ok((balance - cost).max(0.0))
}

fn exhausted(params: &ServiceParams, balance: f64) -> bool {
    !params
        .capacity_levels
        .iter()
        .any(|c| *c > 0.0 && params.beta * c <= balance + FEASIBILITY_TOLERANCE)
}

/// Applies `action` to `state` with the next epoch's engagement and indicators
/// already drawn.
pub fn transition(
    params: &ServiceParams,
    state: &EnvState,
    action: &Action,
    next_engagement: Vec<f64>,
    next_extras: Vec<Vec<f64>>,
) -> Result<StepOutcome, EnvError> {
    if state.t >= params.horizon {
        return Err(EnvError::EpisodeFinished);
    }
    if action.provision.len() != params.n_users {
        return Err(EnvError::MalformedAction(format!(
            "provision mask has {} entries, expected {}",
            action.provision.len(),
            params.n_users
        )));
    }
    let capacity = *params
        .capacity_levels
        .get(action.capacity_index)
        .ok_or_else(|| {
            EnvError::MalformedAction(format!(
                "capacity index {} out of range",
                action.capacity_index
            ))
        })?;
    let balance = budget_update(state.balance, capacity, params.beta)?;
    let quality = perceived_quality(capacity, &action.provision);
    let increments: Vec<f64> = state
        .engagement
        .iter()
        .zip(&action.provision)
        .map(|(x, y)| health_increment(*x, *y, quality, params))
        .collect();
    let health: Vec<f64> = state
        .health
        .iter()
        .zip(&increments)
        .map(|(h, d)| h + d)
        .collect();
    let reward = health
        .iter()
        .zip(&state.health)
        .map(|(h1, h0)| h1 - h0)
        .sum();
    let t = state.t + 1;
    Ok(StepOutcome {
        next_state: EnvState {
            t,
            balance,
            engagement: next_engagement,
            health,
            extras: next_extras,
            budget_exhausted: exhausted(params, balance),
        },
        reward,
        increments,
        done: t == params.horizon,
    })
}

/// Flattens a state into `[balance, t, x_1..x_n, H_1..H_n, E rows]`, each
/// channel divided by its fixed scale.
pub fn encode_observation(
    state: &EnvState,
    params: &ServiceParams,
    scale: &ObservationScale,
) -> Vec<f64> {
    let mut obs = Vec::with_capacity(params.observation_len());
    obs.push(if params.budget > 0.0 {
        state.balance / params.budget
    } else {
        0.0
    });
    obs.push(state.t as f64 / params.horizon as f64);
    obs.extend(state.engagement.iter().map(|x| x / scale.engagement));
    let cap = scale.health_cap(params);
    obs.extend(state.health.iter().map(|h| h / cap));
    for (k, row) in state.extras.iter().enumerate() {
        let s = scale.extras.get(k).copied().unwrap_or(1.0);
        obs.extend(row.iter().map(|v| v / s));
    }
    obs
}

/// Objective of a finished episode: the health stock summed over users and
/// over epochs `1..=T`, re-accumulated from per-step aggregate rewards with
/// zero initial health.
pub fn episode_objective(rewards: &[f64], horizon: usize) -> Result<f64, EnvError> {
    if rewards.len() != horizon {
        return Err(EnvError::IncompleteEpisode {
            got: rewards.len(),
            expected: horizon,
        });
    }
    let mut stock = 0.0;
    let mut total = 0.0;
    for r in rewards {
        stock += r;
        total += stock;
    }
    Ok(total)
}

/// Same objective written as `sum_t (T - t) * r_t`.
pub fn weighted_objective(rewards: &[f64]) -> f64 {
    let horizon = rewards.len();
    rewards
        .iter()
        .enumerate()
        .map(|(t, r)| (horizon - t) as f64 * r)
        .sum()
}

/// Everything needed to build independent environment instances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub params: ServiceParams,
    pub emulator: Emulator,
    #[serde(default)]
    pub scale: ObservationScale,
}

impl EnvSpec {
    pub fn new(params: ServiceParams, emulator: Emulator) -> Self {
        Self {
            params,
            emulator,
            scale: ObservationScale::default(),
        }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.params.validate()?;
        self.emulator.validate()?;
        if self.emulator.n_users() != self.params.n_users {
            return Err(invalid(
                "n_users",
                format!(
                    "emulator provides {} users, params declare {}",
                    self.emulator.n_users(),
                    self.params.n_users
                ),
            ));
        }
        if self.params.n_extras > self.emulator.max_extras() {
            return Err(invalid(
                "n_extras",
                format!(
                    "emulator supplies at most {} channels",
                    self.emulator.max_extras()
                ),
            ));
        }
        Ok(())
    }

    pub fn build(&self, seed: u64) -> Result<Env, EnvError> {
        Env::new(self.clone(), seed)
    }
}

/// A single simulator instance with its own random stream.
#[derive(Debug, Clone)]
pub struct Env {
    spec: EnvSpec,
    state: EnvState,
    rng: ChaCha8Rng,
}

impl Env {
    /// Validates `spec` and resets with `seed`.
    pub fn new(spec: EnvSpec, seed: u64) -> Result<Self, EnvError> {
        spec.validate()?;
        let mut env = Self {
            state: EnvState {
                t: 0,
                balance: 0.0,
                engagement: vec![],
                health: vec![],
                extras: vec![],
                budget_exhausted: true,
            },
            rng: ChaCha8Rng::seed_from_u64(seed),
            spec,
        };
        env.reset(seed);
        Ok(env)
    }

    /// Zero health, full budget, epoch-0 engagement drawn from the emulator.
    pub fn reset(&mut self, seed: u64) -> &EnvState {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        let p = &self.spec.params;
        let (engagement, extras) = self.spec.emulator.draw(0, p.n_extras, &mut self.rng);
        self.state = EnvState {
            t: 0,
            balance: p.budget,
            engagement,
            health: vec![0.0; p.n_users],
            extras,
            budget_exhausted: exhausted(p, p.budget),
        };
        &self.state
    }

    pub fn step(&mut self, action: &Action) -> Result<StepOutcome, EnvError> {
        let p = &self.spec.params;
        if self.state.t >= p.horizon {
            return Err(EnvError::EpisodeFinished);
        }
        let next_t = self.state.t + 1;
        let (engagement, extras) = if next_t < p.horizon {
            self.spec.emulator.draw(next_t, p.n_extras, &mut self.rng)
        } else {
            (self.state.engagement.clone(), self.state.extras.clone())
        };
        let out = transition(p, &self.state, action, engagement, extras)?;
        self.state = out.next_state.clone();
        Ok(out)
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn params(&self) -> &ServiceParams {
        &self.spec.params
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn is_done(&self) -> bool {
        self.state.t >= self.spec.params.horizon
    }

    pub fn feasible_mask(&self) -> Vec<bool> {
        self.spec.params.feasible_levels(self.state.balance)
    }

    pub fn observation(&self) -> Vec<f64> {
        encode_observation(&self.state, &self.spec.params, &self.spec.scale)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::behavior::{
        default_population, FixedSchedule, ScenarioEmulator, ScenarioKind, ScenarioSpec,
    };

    fn schedule_spec(params: ServiceParams, rows: Vec<Vec<f64>>) -> EnvSpec {
        EnvSpec::new(
            params,
            Emulator::Schedule(FixedSchedule { engagement: rows }),
        )
    }

    fn reference_spec(kind: ScenarioKind) -> EnvSpec {
        let params = ServiceParams::reference();
        EnvSpec::new(
            params.clone(),
            Emulator::Scenario(ScenarioEmulator {
                profiles: default_population(params.n_users),
                scenario: ScenarioSpec::new(kind, params.horizon),
                coupling: Default::default(),
            }),
        )
    }

    fn two_users() -> ServiceParams {
        ServiceParams {
            alpha1: 0.5,
            alpha2: 0.4,
            budget: 10.0,
            beta: 1.0,
            capacity_levels: vec![0.0, 1.0, 16.0],
            n_users: 2,
            horizon: 2,
            n_extras: 0,
            discount: 1.0,
        }
    }

    #[test]
    fn quality_examples() {
        let mask = |k: usize, n: usize| (0..n).map(|i| i < k).collect::<Vec<_>>();
        assert_eq!(perceived_quality(8.0, &mask(4, 6)), 2.0);
        assert_eq!(perceived_quality(15.0, &mask(16, 16)), 0.9375);
        assert_eq!(perceived_quality(5.0, &mask(0, 3)), 0.0);
    }

    #[test]
    fn increment_examples() {
        let p = ServiceParams::reference();
        assert_eq!(health_increment(7.0, false, 3.0, &p), 0.0);
        assert_eq!(health_increment(9.0, true, 1.0, &p), 3.0);
        assert!((health_increment(16.0, true, 32.0, &p) - 16.0).abs() < 1e-12);
        // 2 * 2^0.4 evaluated at 40 digits: 2.6390158215457885187...
        assert!((health_increment(4.0, true, 2.0, &p) - 2.639_015_821_545_788_5).abs() < 1e-14);
        assert_eq!(health_increment(4.0, true, 0.0, &p), 0.0);
    }

    #[test]
    fn budget_examples() {
        assert!((budget_update(100.0, 10.0, 0.9).unwrap() - 91.0).abs() < 1e-12);
        assert_eq!(budget_update(5.0, 0.0, 0.9).unwrap(), 5.0);
        assert_eq!(budget_update(0.9, 1.0, 0.9).unwrap(), 0.0);
        assert!(matches!(
            budget_update(0.5, 1.0, 0.9),
            Err(EnvError::Infeasible { .. })
        ));
    }

    #[test]
    fn empty_mask_gives_zero_reward() {
        let mut env = schedule_spec(two_users(), vec![vec![9.0, 16.0]; 2])
            .build(0)
            .unwrap();
        let out = env.step(&Action::new(1, vec![false, false])).unwrap();
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.next_state.health, vec![0.0, 0.0]);
        assert_eq!(out.next_state.balance, 9.0);
    }

    #[test]
    fn zero_mask_still_pays_capacity() {
        let mut params = two_users();
        params.budget = 20.0;
        let mut env = schedule_spec(params, vec![vec![9.0, 16.0]; 2])
            .build(0)
            .unwrap();
        let out = env.step(&Action::new(2, vec![false, false])).unwrap();
        assert_eq!(out.reward, 0.0);
        assert_eq!(out.next_state.balance, 4.0);
    }

    #[test]
    fn single_user_steps_compose_increments() {
        // user 0 alone at capacity 1 sees q=1 -> 9^0.5 = 3;
        // user 1 alone at capacity 16 sees q=16 -> 4 * 16^0.4
        let mut params = two_users();
        params.budget = 17.0;
        let mut env = schedule_spec(params.clone(), vec![vec![9.0, 16.0]; 2])
            .build(0)
            .unwrap();
        let a = env.step(&Action::new(1, vec![true, false])).unwrap();
        assert_eq!(a.reward, 3.0);
        let b = env.step(&Action::new(2, vec![false, true])).unwrap();
        assert!((b.reward - 4.0 * 16f64.powf(0.4)).abs() < 1e-12);
        assert!(b.done);
        assert_eq!(b.next_state.balance, 0.0);
        assert!(matches!(
            env.step(&Action::new(0, vec![true, true])),
            Err(EnvError::EpisodeFinished)
        ));
    }

    #[test]
    fn zero_capacity_full_provision() {
        let mut env = schedule_spec(two_users(), vec![vec![9.0, 16.0]; 2])
            .build(0)
            .unwrap();
        let out = env.step(&Action::provide_all(0, 2)).unwrap();
        assert_eq!(out.reward, 0.0);
    }

    #[test]
    fn infeasible_action_rejected() {
        let mut env = schedule_spec(two_users(), vec![vec![1.0, 1.0]; 2])
            .build(0)
            .unwrap();
        assert!(matches!(
            env.step(&Action::provide_all(2, 2)),
            Err(EnvError::Infeasible { .. })
        ));
        assert_eq!(env.feasible_mask(), vec![true, true, false]);
    }

    #[test]
    fn reset_is_deterministic() {
        let spec = reference_spec(ScenarioKind::E2);
        let a = spec.build(42).unwrap();
        let b = spec.build(42).unwrap();
        assert_eq!(a.state(), b.state());
        assert_eq!(a.observation(), b.observation());
        let c = spec.build(43).unwrap();
        assert_ne!(a.state(), c.state());
    }

    #[test]
    fn zero_budget_allows_only_zero_capacity() {
        let mut params = ServiceParams::reference();
        params.budget = 0.0;
        let spec = EnvSpec {
            params,
            ..reference_spec(ScenarioKind::E1)
        };
        let env = spec.build(1).unwrap();
        assert!(env.state().budget_exhausted);
        let mask = env.feasible_mask();
        assert!(mask[0] && mask[1..].iter().all(|m| !m));
    }

    #[test]
    fn observation_layout() {
        let spec = reference_spec(ScenarioKind::E1);
        let env = spec.build(3).unwrap();
        let obs = env.observation();
        assert_eq!(obs.len(), 98);
        assert_eq!(obs[0], 1.0);
        assert_eq!(obs[1], 0.0);

        let mut s = env.state().clone();
        s.engagement[0] = 10.0;
        let a = encode_observation(&s, env.params(), &spec.scale);
        assert_eq!(a[2], 1.0);
        s.health[3] = 5.0;
        let b = encode_observation(&s, env.params(), &spec.scale);
        let diff: Vec<usize> = (0..a.len()).filter(|&i| a[i] != b[i]).collect();
        assert_eq!(diff, vec![2 + 16 + 3]);
    }

    #[test]
    fn objective_examples() {
        assert_eq!(episode_objective(&[0.0, 0.0, 0.0], 3).unwrap(), 0.0);
        assert_eq!(episode_objective(&[1.0, 1.0], 2).unwrap(), 3.0);
        assert_eq!(weighted_objective(&[1.0, 1.0]), 3.0);
        assert!(matches!(
            episode_objective(&[1.0], 2),
            Err(EnvError::IncompleteEpisode {
                got: 1,
                expected: 2
            })
        ));
    }

    #[test]
    fn param_validation_names_fields() {
        let mut p = ServiceParams::reference();
        p.alpha1 = 0.7;
        assert!(matches!(
            p.validate(),
            Err(EnvError::InvalidParams {
                field: "alpha1",
                ..
            })
        ));
        let mut p = ServiceParams::reference();
        p.capacity_levels = vec![1.0, 2.0];
        assert!(matches!(
            p.validate(),
            Err(EnvError::InvalidParams {
                field: "capacity_levels",
                ..
            })
        ));
        let mut p = ServiceParams::reference();
        p.beta = 0.0;
        assert!(matches!(
            p.validate(),
            Err(EnvError::InvalidParams { field: "beta", .. })
        ));
    }

    #[test]
    fn joint_action_count() {
        assert_eq!(two_users().joint_action_count(), 12);
    }
}
