//! Simulation and learning toolkit for budget-constrained resource management in
//! a health information service.
//!
//! The service provider chooses, at every decision epoch, a total service
//! capacity and which users receive the service. Capacity is shared equally
//! among the served users, and each served user's health stock grows by a
//! Cobb-Douglas product of their engagement and the perceived quality. The
//! provider pays `beta * capacity` per epoch out of a fixed operating budget.
//!
//! Modules:
//! - [`env`]: the decision process (state, action, transition, reward, objective).
//! - [`behavior`]: engagement emulators, lifelog ingestion and statistics.
//! - [`neural`]: LSTM + layer-norm trunk with actor and critic heads, gradients,
//!   optimizers and checkpoints.
//! - [`agent`]: PPO-Clip training and evaluation.
//! - [`baselines`]: fixed allocation plans, exact small-instance oracle and
//!   policy comparison.

pub mod agent;
pub mod baselines;
pub mod behavior;
pub mod env;
pub mod neural;

pub use env::{Action, Env, EnvSpec, EnvState, ServiceParams, StepOutcome};
