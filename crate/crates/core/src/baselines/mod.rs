//! Non-adaptive baselines and exact optimizers for small deterministic
//! instances.

mod compare;
mod oracle;
mod plans;

pub use compare::{compare_policies, ComparisonTable, Improvement, PolicyReport};
pub use oracle::{
    dp_optimal, enumerate_optimal, exhaustive_optimal, replay_objective, sequence_count,
    OptimalPlan, OracleMethod, EXHAUSTIVE_LIMIT,
};
pub use plans::{
    constant_level, even_spread_target, fixed_plan_action, FixedPlanPolicy, FixedPlanSpec, PlanKind,
};

use thiserror::Error;

use crate::agent::AgentError;
use crate::env::EnvError;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("invalid baseline specification: {0}")]
    InvalidSpec(String),
    #[error("instance too large: {0}")]
    TooLarge(String),
    #[error("capacity level {0} is not a non-negative integer")]
    NotOnGrid(f64),
}
