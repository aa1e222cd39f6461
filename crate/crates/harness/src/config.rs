//! TOML configuration for experiments. Every field has a default, so a
//! partial file overrides only what it names.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use rfd::agent::AgentConfig;
use rfd::baselines::BaselineConfig;
use rfd::env::CourierConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    /// Smoothed success rate an RfD curve must reach.
    pub success_rate: f64,
    /// Allowed shortfall of the smoothed greedy return, as a fraction of
    /// the smoothed optimal return.
    pub return_tolerance: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            success_rate: 0.95,
            return_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct LabConfig {
    pub rfd: RfdSection,
    pub baseline: BaselineConfig<f64>,
    pub courier: CourierConfig,
    pub convergence: Thresholds,
}

/// The RfD agent's parameters, flattened into one table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfdSection {
    pub alpha: f64,
    pub gamma: f64,
    pub omega: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    pub lambda_eps: f64,
    pub beta_max: f64,
    pub lambda_beta: f64,
    pub tau: u64,
}

impl Default for RfdSection {
    fn default() -> Self {
        Self::from(&AgentConfig::<f64>::default())
    }
}

impl From<&AgentConfig<f64>> for RfdSection {
    fn from(c: &AgentConfig<f64>) -> Self {
        let p = &c.policy;
        RfdSection {
            alpha: p.alpha,
            gamma: p.gamma,
            omega: p.omega,
            eps_max: p.eps_max,
            eps_min: p.eps_min,
            lambda_eps: p.lambda_eps,
            beta_max: p.beta_max,
            lambda_beta: p.lambda_beta,
            tau: c.tau,
        }
    }
}

impl RfdSection {
    pub fn agent_config(&self) -> AgentConfig<f64> {
        let mut c = AgentConfig::<f64>::default();
        c.policy.alpha = self.alpha;
        c.policy.gamma = self.gamma;
        c.policy.omega = self.omega;
        c.policy.eps_max = self.eps_max;
        c.policy.eps_min = self.eps_min;
        c.policy.lambda_eps = self.lambda_eps;
        c.policy.beta_max = self.beta_max;
        c.policy.lambda_beta = self.lambda_beta;
        c.tau = self.tau;
        c
    }
}

impl LabConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: LabConfig = toml::from_str(text)?;
        cfg.rfd.agent_config().validate().map_err(anyhow::Error::msg)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = LabConfig::default();
        assert_eq!(LabConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert_eq!(cfg.rfd.agent_config(), AgentConfig::default());
    }

    #[test]
    fn partial_file_overrides_named_fields() {
        let cfg = LabConfig::from_toml("[rfd]\nomega = 50.0\ntau = 300\n[convergence]\nsuccess_rate = 0.9\n").unwrap();
        assert_eq!(cfg.rfd.omega, 50.0);
        assert_eq!(cfg.rfd.tau, 300);
        assert_eq!(cfg.rfd.gamma, 0.9);
        assert_eq!(cfg.convergence.success_rate, 0.9);
        assert_eq!(cfg.baseline, BaselineConfig::default());
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(LabConfig::from_toml("[rfd]\ngamma = 1.5\n").is_err());
        assert!(LabConfig::from_toml("[rfd]\nalpha = \"fast\"\n").is_err());
    }
}
