use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::agent::{AgentError, Policy};
use crate::env::{Action, Env, EnvState, ServiceParams, FEASIBILITY_TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlanKind {
    Plan1,
    Plan2,
    Plan3,
    Random,
}

impl PlanKind {
    pub const FIXED: [PlanKind; 3] = [PlanKind::Plan1, PlanKind::Plan2, PlanKind::Plan3];

    pub fn label(self) -> &'static str {
        match self {
            PlanKind::Plan1 => "plan1",
            PlanKind::Plan2 => "plan2",
            PlanKind::Plan3 => "plan3",
            PlanKind::Random => "random",
        }
    }
}

/// A non-adaptive baseline. `target_capacity` overrides the per-epoch
/// capacity target `B / (beta T)` and is only meaningful for the
/// constant-capacity plans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPlanSpec {
    pub plan: PlanKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_capacity: Option<f64>,
}

impl FixedPlanSpec {
    pub fn new(plan: PlanKind) -> Self {
        Self {
            plan,
            target_capacity: None,
        }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        match (self.plan, self.target_capacity) {
            (PlanKind::Plan1 | PlanKind::Plan3, Some(c)) if !(c >= 0.0 && c.is_finite()) => Err(
                BaselineError::InvalidSpec(format!("target_capacity must be >= 0, got {c}")),
            ),
            (PlanKind::Plan2 | PlanKind::Random, Some(_)) => Err(BaselineError::InvalidSpec(
                format!("target_capacity does not apply to {}", self.plan.label()),
            )),
            _ => Ok(()),
        }
    }
}

/// Index of the level closest to `target` among levels that can be paid for
/// in every epoch of the horizon. Ties go to the cheaper level.
pub fn constant_level(params: &ServiceParams, target: f64) -> usize {
    let horizon = params.horizon as f64;
    let mut best: Option<usize> = None;
    for (j, c) in params.capacity_levels.iter().enumerate() {
        if params.beta * c * horizon > params.budget + FEASIBILITY_TOLERANCE {
            continue;
        }
        let better = match best {
            None => true,
            Some(b) => {
                let (d, db) = (
                    (c - target).abs(),
                    (params.capacity_levels[b] - target).abs(),
                );
                d < db || (d == db && *c < params.capacity_levels[b])
            }
        };
        if better {
            best = Some(j);
        }
    }
    // validated params always contain a zero level, which is sustainable
    best.unwrap_or(0)
}

/// Capacity spread evenly over the whole horizon.
pub fn even_spread_target(params: &ServiceParams) -> f64 {
    params.budget / (params.beta * params.horizon as f64)
}

fn largest_affordable(params: &ServiceParams, limit: f64, balance: f64) -> usize {
    let mut best = None;
    for (j, c) in params.capacity_levels.iter().enumerate() {
        let cost = params.beta * c;
        if cost <= balance + FEASIBILITY_TOLERANCE
            && *c <= limit + FEASIBILITY_TOLERANCE
            && best.is_none_or(|b: usize| *c > params.capacity_levels[b])
        {
            best = Some(j);
        }
    }
    best.unwrap_or_else(|| cheapest(params))
}

fn cheapest(params: &ServiceParams) -> usize {
    let mut best = 0;
    for (j, c) in params.capacity_levels.iter().enumerate() {
        if *c < params.capacity_levels[best] {
            best = j;
        }
    }
    best
}

/// The action a fixed plan takes in `state`.
pub fn fixed_plan_action(
    spec: &FixedPlanSpec,
    params: &ServiceParams,
    state: &EnvState,
    rng: &mut ChaCha8Rng,
) -> Action {
    let n = params.n_users;
    match spec.plan {
        PlanKind::Plan1 | PlanKind::Plan3 => {
            let target = spec
                .target_capacity
                .unwrap_or_else(|| even_spread_target(params));
            let level = params.capacity_levels[constant_level(params, target)];
            // the constant level is sustainable, so this only bites with a
            // custom target
            Action::provide_all(largest_affordable(params, level, state.balance), n)
        }
        PlanKind::Plan2 => {
            let remaining = params.horizon.saturating_sub(state.t).max(1) as f64;
            let limit = state.balance / (params.beta * remaining);
            Action::provide_all(largest_affordable(params, limit, state.balance), n)
        }
        PlanKind::Random => {
            let feasible: Vec<usize> = params
                .feasible_levels(state.balance)
                .iter()
                .enumerate()
                .filter(|(_, ok)| **ok)
                .map(|(j, _)| j)
                .collect();
            let capacity = if feasible.is_empty() {
                cheapest(params)
            } else {
                feasible[rng.gen_range(0..feasible.len())]
            };
            Action::new(capacity, (0..n).map(|_| rng.gen::<bool>()).collect())
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixedPlanPolicy {
    spec: FixedPlanSpec,
}

impl FixedPlanPolicy {
    pub fn new(spec: FixedPlanSpec) -> Result<Self, BaselineError> {
        spec.validate()?;
        Ok(Self { spec })
    }
}

impl Policy for FixedPlanPolicy {
    fn name(&self) -> &str {
        self.spec.plan.label()
    }

    fn act(&mut self, env: &Env, rng: &mut ChaCha8Rng) -> Result<Action, AgentError> {
        Ok(fixed_plan_action(
            &self.spec,
            env.params(),
            env.state(),
            rng,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::run_episode;
    use crate::behavior::{
        default_population, Emulator, ScenarioEmulator, ScenarioKind, ScenarioSpec,
    };
    use crate::env::EnvSpec;
    use rand::SeedableRng;

    fn reference_env() -> EnvSpec {
        let p = ServiceParams::reference();
        let emu = Emulator::Scenario(ScenarioEmulator {
            profiles: default_population(p.n_users),
            scenario: ScenarioSpec::new(ScenarioKind::E2, p.horizon),
            coupling: Default::default(),
        });
        EnvSpec::new(p, emu)
    }

    #[test]
    fn reference_constant_level() {
        let p = ServiceParams::reference();
        assert!((even_spread_target(&p) - 100.0 / 27.0).abs() < 1e-12);
        // level 4 would cost 0.9 * 4 * 30 = 108 > 100
        let j = constant_level(&p, even_spread_target(&p));
        assert_eq!(p.capacity_levels[j], 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = reference_env().build(1).unwrap().state().clone();
        let mut spent = 0.0;
        for _ in 0..p.horizon {
            let a = fixed_plan_action(&FixedPlanSpec::new(PlanKind::Plan3), &p, &state, &mut rng);
            assert_eq!(a.capacity_index, j);
            assert!(a.provision.iter().all(|y| *y));
            spent += p.beta * p.capacity_levels[a.capacity_index];
            state.balance -= p.beta * p.capacity_levels[a.capacity_index];
            state.t += 1;
        }
        assert!(spent <= p.budget + 1e-9);
    }

    #[test]
    fn plan2_spreads_remaining_balance() {
        let p = ServiceParams::reference();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut state = reference_env().build(1).unwrap().state().clone();
        let spec = FixedPlanSpec::new(PlanKind::Plan2);
        let a = fixed_plan_action(&spec, &p, &state, &mut rng);
        assert_eq!(p.capacity_levels[a.capacity_index], 3.0);
        state.balance = 0.5;
        state.t = 29;
        let a = fixed_plan_action(&spec, &p, &state, &mut rng);
        assert_eq!(p.capacity_levels[a.capacity_index], 0.0);
        assert!(a.provision.iter().all(|y| *y));
        // one epoch left: spend everything that fits
        state.balance = 10.0;
        let a = fixed_plan_action(&spec, &p, &state, &mut rng);
        assert_eq!(p.capacity_levels[a.capacity_index], 11.0);
    }

    #[test]
    fn every_plan_is_feasible_and_plan3_is_seed_free() {
        let spec = reference_env();
        let mut env = spec.build(0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [
            PlanKind::Plan1,
            PlanKind::Plan2,
            PlanKind::Plan3,
            PlanKind::Random,
        ] {
            let mut policy = FixedPlanPolicy::new(FixedPlanSpec::new(kind)).unwrap();
            for seed in 0..5 {
                let ep = run_episode(&mut env, &mut policy, seed, &mut rng).unwrap();
                assert_eq!(ep.rewards.len(), 30);
                assert!(env.state().balance >= 0.0);
            }
        }
    }

    #[test]
    fn spec_validation() {
        assert!(FixedPlanSpec {
            plan: PlanKind::Plan2,
            target_capacity: Some(3.0)
        }
        .validate()
        .is_err());
        assert!(FixedPlanSpec {
            plan: PlanKind::Plan1,
            target_capacity: Some(-1.0)
        }
        .validate()
        .is_err());
        assert!(FixedPlanSpec {
            plan: PlanKind::Plan3,
            target_capacity: Some(2.0)
        }
        .validate()
        .is_ok());
    }
}
