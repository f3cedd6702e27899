use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::behavior::FixedSchedule;
use crate::env::{
    episode_objective, health_increment, transition, Action, EnvState, ServiceParams,
    FEASIBILITY_TOLERANCE,
};

/// Largest number of action sequences exhaustive search will visit.
pub const EXHAUSTIVE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMethod {
    Exhaustive,
    DynamicProgramming,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalPlan {
    pub method: OracleMethod,
    /// Objective of `actions` replayed through the simulator.
    pub value: f64,
    pub actions: Vec<Action>,
}

fn check(params: &ServiceParams, schedule: &FixedSchedule) -> Result<(), BaselineError> {
    params.validate()?;
    if schedule.engagement.is_empty()
        || schedule
            .engagement
            .iter()
            .any(|r| r.len() != params.n_users)
    {
        return Err(BaselineError::InvalidSpec(format!(
            "schedule rows must hold {} engagement values",
            params.n_users
        )));
    }
    Ok(())
}

fn initial_state(params: &ServiceParams, schedule: &FixedSchedule) -> EnvState {
    EnvState {
        t: 0,
        balance: params.budget,
        engagement: schedule.row(0).to_vec(),
        health: vec![0.0; params.n_users],
        extras: vec![vec![0.0; params.n_users]; params.n_extras],
        budget_exhausted: false,
    }
}

fn advance(
    params: &ServiceParams,
    schedule: &FixedSchedule,
    state: &EnvState,
    action: &Action,
) -> Result<(EnvState, f64), BaselineError> {
    let next_t = state.t + 1;
    let engagement = if next_t < params.horizon {
        schedule.row(next_t).to_vec()
    } else {
        state.engagement.clone()
    };
    let out = transition(params, state, action, engagement, state.extras.clone())?;
    Ok((out.next_state, out.reward))
}

/// Objective of a fixed action sequence on a deterministic schedule, computed
/// the same way the environment scores an episode.
pub fn replay_objective(
    params: &ServiceParams,
    schedule: &FixedSchedule,
    actions: &[Action],
) -> Result<f64, BaselineError> {
    check(params, schedule)?;
    let mut state = initial_state(params, schedule);
    let mut rewards = Vec::with_capacity(actions.len());
    for a in actions {
        let (next, r) = advance(params, schedule, &state, a)?;
        rewards.push(r);
        state = next;
    }
    Ok(episode_objective(&rewards, params.horizon)?)
}

/// Number of action sequences exhaustive search would consider.
pub fn sequence_count(params: &ServiceParams) -> Option<u128> {
    let per_step = params.joint_action_count();
    if params.n_users >= 127 {
        return None;
    }
    let mut total: u128 = 1;
    for _ in 0..params.horizon {
        total = total.checked_mul(per_step)?;
    }
    Some(total)
}

struct Search<'a> {
    params: &'a ServiceParams,
    schedule: &'a FixedSchedule,
    actions: Vec<Action>,
    rewards: Vec<f64>,
    best: Option<(f64, Vec<Action>)>,
}

impl Search<'_> {
    fn visit(&mut self, state: &EnvState) -> Result<(), BaselineError> {
        let p = self.params;
        if state.t == p.horizon {
            let value = episode_objective(&self.rewards, p.horizon)?;
            if self.best.as_ref().is_none_or(|(b, _)| value > *b) {
                self.best = Some((value, self.actions.clone()));
            }
            return Ok(());
        }
        let n = p.n_users;
        for (c, ok) in p.feasible_levels(state.balance).into_iter().enumerate() {
            if !ok {
                continue;
            }
            for bits in 0..(1u64 << n) {
                let action = Action::new(c, (0..n).map(|i| bits >> i & 1 == 1).collect());
                let (next, r) = advance(p, self.schedule, state, &action)?;
                self.actions.push(action);
                self.rewards.push(r);
                self.visit(&next)?;
                self.actions.pop();
                self.rewards.pop();
            }
        }
        Ok(())
    }
}

/// Exact optimum by visiting every feasible action sequence.
pub fn exhaustive_optimal(
    params: &ServiceParams,
    schedule: &FixedSchedule,
) -> Result<OptimalPlan, BaselineError> {
    check(params, schedule)?;
    match sequence_count(params) {
        Some(c) if c <= EXHAUSTIVE_LIMIT => {}
        c => {
            return Err(BaselineError::TooLarge(format!(
                "{} action sequences exceed the exhaustive limit of {EXHAUSTIVE_LIMIT}",
                c.map_or_else(|| "more than 2^128".to_string(), |c| c.to_string())
            )))
        }
    }
    let mut search = Search {
        params,
        schedule,
        actions: Vec::with_capacity(params.horizon),
        rewards: Vec::with_capacity(params.horizon),
        best: None,
    };
    search.visit(&initial_state(params, schedule))?;
    let (value, actions) = search.best.expect("capacity 0 keeps every epoch feasible");
    Ok(OptimalPlan {
        method: OracleMethod::Exhaustive,
        value,
        actions,
    })
}

/// Best provisioning for capacity `c` given engagement `x`: for each served
/// count k the k most engaged users are served. Returns the increment sum and
/// the mask.
fn best_provision(params: &ServiceParams, x: &[f64], c: f64) -> (f64, Vec<bool>) {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|a, b| x[*b].total_cmp(&x[*a]).then(a.cmp(b)));
    let mut best = (0.0, 0);
    for k in 1..=x.len() {
        let q = c / k as f64;
        let total: f64 = order[..k]
            .iter()
            .map(|&i| health_increment(x[i], true, q, params))
            .sum();
        if total > best.0 {
            best = (total, k);
        }
    }
    let mut mask = vec![false; x.len()];
    for &i in &order[..best.1] {
        mask[i] = true;
    }
    (best.0, mask)
}

/// Exact optimum by dynamic programming over epochs and capacity units spent.
/// Requires integer capacity levels so that the spent budget lives on the
/// grid `beta * k`.
pub fn dp_optimal(
    params: &ServiceParams,
    schedule: &FixedSchedule,
) -> Result<OptimalPlan, BaselineError> {
    check(params, schedule)?;
    let levels: Vec<usize> = params
        .capacity_levels
        .iter()
        .map(|c| {
            if (c - c.round()).abs() < 1e-12 && *c <= 1e6 {
                Ok(c.round() as usize)
            } else {
                Err(BaselineError::NotOnGrid(*c))
            }
        })
        .collect::<Result<_, _>>()?;
    let horizon = params.horizon;
    let max_level = *levels.last().unwrap_or(&0);
    let affordable = ((params.budget + FEASIBILITY_TOLERANCE) / params.beta).floor();
    let units = (max_level * horizon).min(if affordable.is_finite() {
        affordable as usize
    } else {
        usize::MAX
    });
    let fits = |k: usize| params.beta * k as f64 <= params.budget + FEASIBILITY_TOLERANCE;

    // per-epoch best reward for every level
    let step: Vec<Vec<(f64, Vec<bool>)>> = (0..horizon)
        .map(|t| {
            params
                .capacity_levels
                .iter()
                .map(|c| best_provision(params, schedule.row(t), *c))
                .collect()
        })
        .collect();

    // value[t][k]: best weighted reward from epoch t with k units spent
    let mut value = vec![vec![0.0; units + 1]; horizon + 1];
    let mut choice = vec![vec![0usize; units + 1]; horizon];
    for t in (0..horizon).rev() {
        let weight = (horizon - t) as f64;
        for k in 0..=units {
            let mut best = (f64::NEG_INFINITY, 0);
            for (j, c) in levels.iter().enumerate() {
                let spent = k + c;
                if spent > units || !fits(spent) {
                    continue;
                }
                let v = weight * step[t][j].0 + value[t + 1][spent];
                if v > best.0 {
                    best = (v, j);
                }
            }
            value[t][k] = best.0;
            choice[t][k] = best.1;
        }
    }

    let mut actions = Vec::with_capacity(horizon);
    let mut k = 0;
    for t in 0..horizon {
        let j = choice[t][k];
        actions.push(Action::new(j, step[t][j].1.clone()));
        k += levels[j];
    }
    let value = replay_objective(params, schedule, &actions)?;
    Ok(OptimalPlan {
        method: OracleMethod::DynamicProgramming,
        value,
        actions,
    })
}

/// Exhaustive search when the instance is small enough, dynamic programming
/// otherwise.
pub fn enumerate_optimal(
    params: &ServiceParams,
    schedule: &FixedSchedule,
) -> Result<OptimalPlan, BaselineError> {
    match exhaustive_optimal(params, schedule) {
        Err(BaselineError::TooLarge(_)) => dp_optimal(params, schedule),
        other => other,
    }
}
