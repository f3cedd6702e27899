use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::agent::{evaluate, improvement_pct, Policy};
use crate::env::EnvSpec;

/// Evaluation of one policy averaged over seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyReport {
    pub name: String,
    pub per_user: Vec<f64>,
    pub aggregate: f64,
    pub mean_objective: f64,
    /// Standard deviation of the per-seed mean objectives.
    pub seed_std: f64,
    /// Per-seed mean objectives.
    pub seed_objectives: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub episodes: usize,
    pub seeds: Vec<u64>,
    pub policies: Vec<PolicyReport>,
}

/// Percent improvements of one policy over another.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Improvement {
    pub per_user: Vec<f64>,
    pub aggregate: f64,
    pub objective: f64,
}

impl ComparisonTable {
    pub fn get(&self, name: &str) -> Option<&PolicyReport> {
        self.policies.iter().find(|p| p.name == name)
    }

    pub fn improvement(&self, policy: &str, baseline: &str) -> Option<Improvement> {
        let (a, b) = (self.get(policy)?, self.get(baseline)?);
        Some(Improvement {
            per_user: a
                .per_user
                .iter()
                .zip(&b.per_user)
                .map(|(x, y)| improvement_pct(*x, *y))
                .collect(),
            aggregate: improvement_pct(a.aggregate, b.aggregate),
            objective: improvement_pct(a.mean_objective, b.mean_objective),
        })
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

/// Evaluates every named policy on `episodes` episodes for each seed. `make`
/// builds the policy instance for a seed, so per-seed trained policies and
/// seed-independent plans share one code path. All policies see the same
/// engagement draws for a given seed.
pub fn compare_policies<F>(
    names: &[&str],
    spec: &EnvSpec,
    seeds: &[u64],
    episodes: usize,
    mut make: F,
) -> Result<ComparisonTable, BaselineError>
where
    F: FnMut(&str, u64) -> Result<Box<dyn Policy>, BaselineError>,
{
    if names.len() < 2 {
        return Err(BaselineError::InvalidSpec(
            "comparison needs at least two policies".into(),
        ));
    }
    if seeds.is_empty() {
        return Err(BaselineError::InvalidSpec(
            "comparison needs at least one seed".into(),
        ));
    }
    let n = spec.params.n_users;
    let mut policies = Vec::with_capacity(names.len());
    for name in names {
        let mut per_user = vec![0.0; n];
        let mut seed_objectives = Vec::with_capacity(seeds.len());
        for &seed in seeds {
            let mut policy = make(name, seed)?;
            let report = evaluate(policy.as_mut(), spec, episodes, seed)?;
            for (acc, v) in per_user.iter_mut().zip(&report.per_user) {
                *acc += v;
            }
            seed_objectives.push(report.mean_objective);
        }
        per_user.iter_mut().for_each(|v| *v /= seeds.len() as f64);
        let (mean_objective, seed_std) = mean_std(&seed_objectives);
        policies.push(PolicyReport {
            name: name.to_string(),
            aggregate: per_user.iter().sum(),
            per_user,
            mean_objective,
            seed_std,
            seed_objectives,
        });
    }
    Ok(ComparisonTable {
        episodes,
        seeds: seeds.to_vec(),
        policies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baselines::{FixedPlanPolicy, FixedPlanSpec, PlanKind};
    use crate::behavior::{
        default_population, Emulator, ScenarioEmulator, ScenarioKind, ScenarioSpec,
    };
    use crate::env::ServiceParams;

    #[test]
    fn self_comparison_is_zero() {
        let p = ServiceParams::reference();
        let spec = EnvSpec::new(
            p.clone(),
            Emulator::Scenario(ScenarioEmulator {
                profiles: default_population(p.n_users),
                scenario: ScenarioSpec::new(ScenarioKind::E3, p.horizon),
                coupling: Default::default(),
            }),
        );
        let make = |_: &str, _: u64| -> Result<Box<dyn Policy>, BaselineError> {
            Ok(Box::new(FixedPlanPolicy::new(FixedPlanSpec::new(
                PlanKind::Plan2,
            ))?))
        };
        let table = compare_policies(&["a", "b"], &spec, &[1, 2], 3, make).unwrap();
        let imp = table.improvement("a", "b").unwrap();
        assert!(imp.per_user.iter().all(|v| *v == 0.0));
        assert_eq!(imp.aggregate, 0.0);
        assert_eq!(imp.objective, 0.0);
        let a = table.get("a").unwrap();
        assert!((a.aggregate - a.per_user.iter().sum::<f64>()).abs() < 1e-9);
    }
}
