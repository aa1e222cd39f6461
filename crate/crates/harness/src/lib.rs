//! Experiment orchestration for the rfd agents: configuration, seeded
//! multi-agent runs, learning curves and demonstration tooling.

pub mod config;
pub mod curves;
pub mod demos;
pub mod experiment;

pub use config::LabConfig;
pub use curves::{Convergence, Criterion, CurvePoint};
pub use experiment::{run_experiment, write_outputs, AgentKind, Demos, ExperimentResult, ExperimentSpec};
