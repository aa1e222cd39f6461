//! Tabular agents that learn from a demonstration by explaining it.

pub mod agent;
pub mod baselines;
pub mod demo;
pub mod env;
pub mod perception;
pub mod policy;
pub mod region_map;
pub mod scalar;
pub mod theory;

pub use scalar::Scalar;

pub type QTable64 = policy::QTable<f64>;
pub type QTable32 = policy::QTable<f32>;
pub type PolicyStore64 = policy::PolicyStore<f64>;
pub type PolicyConfig64 = policy::PolicyConfig<f64>;
pub type AgentConfig64 = agent::AgentConfig<f64>;
pub type RfdAgent64 = agent::RfdAgent<f64>;
pub type RfdAgent32 = agent::RfdAgent<f32>;
pub type BaselineAgent64 = baselines::BaselineAgent<f64>;
