//! The reasoning-from-demonstration control loop.

use std::time::Instant;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::env::{ActionId, EnvKind, Environment};
use crate::perception::{instances, Event, Feedback, PerceivedState, PossibleEvent};
use crate::policy::{PolicyConfig, PolicyStore};
use crate::region_map::{Pursuit, RegionMap};
use crate::scalar::Scalar;
use crate::theory::{Effect, Theory};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, bound = "F: Scalar + Serialize + serde::de::DeserializeOwned")]
pub struct AgentConfig<F> {
    pub policy: PolicyConfig<F>,
    /// Maximum actions per attempt.
    pub tau: u64,
}

impl<F: Scalar> Default for AgentConfig<F> {
    fn default() -> Self {
        AgentConfig {
            policy: PolicyConfig::default(),
            tau: 10_000,
        }
    }
}

impl<F: Scalar> AgentConfig<F> {
    pub fn validate(&self) -> Result<(), String> {
        if self.tau == 0 {
            return Err("tau must be positive".into());
        }
        self.policy.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemonstrationError {
    #[error("a demonstration needs at least two states, got {0}")]
    TooShort(usize),
    #[error("demonstration is for {found}, agent trains in {expected}")]
    WrongEnvironment { expected: EnvKind, found: EnvKind },
}

/// A demonstrated state sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Demonstration {
    env: EnvKind,
    states: Vec<PerceivedState>,
}

impl Demonstration {
    pub fn new(env: EnvKind, states: Vec<PerceivedState>) -> Result<Self, DemonstrationError> {
        if states.len() < 2 {
            return Err(DemonstrationError::TooShort(states.len()));
        }
        Ok(Demonstration { env, states })
    }

    pub fn env(&self) -> EnvKind {
        self.env
    }

    pub fn states(&self) -> &[PerceivedState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Outcome {
    Success,
    Failure,
    Timeout,
}

impl Outcome {
    pub fn tag(self) -> &'static str {
        match self {
            Outcome::Success => "SUCCESS",
            Outcome::Failure => "FAILURE",
            Outcome::Timeout => "TIMEOUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub index: usize,
    pub outcome: Outcome,
    pub steps: u64,
    pub cumulative_actions: u64,
    /// Wall-clock seconds; excluded from equality-sensitive comparisons by
    /// callers that check determinism.
    pub wall_time: f64,
}

impl AttemptRecord {
    pub fn success(&self) -> bool {
        self.outcome == Outcome::Success
    }
}

/// What happened on one step, for logging hooks.
#[derive(Debug)]
pub struct StepInfo<'a> {
    pub step: u64,
    pub state: &'a PerceivedState,
    pub pursuit: Option<&'a Pursuit>,
    pub anti_objectives: &'a [PossibleEvent],
    pub action: ActionId,
    pub next: &'a PerceivedState,
    pub events: &'a [Event],
}

#[derive(Debug, Clone)]
pub struct RfdAgent<F> {
    config: AgentConfig<F>,
    env: EnvKind,
    theory: Theory,
    map: RegionMap,
    policies: PolicyStore<F>,
    attempts: usize,
    actions: u64,
}

impl<F: Scalar> RfdAgent<F> {
    pub fn new(env: EnvKind, n_actions: usize, config: AgentConfig<F>) -> Self {
        RfdAgent {
            config,
            env,
            theory: Theory::new(),
            map: RegionMap::new(),
            policies: PolicyStore::new(n_actions),
            attempts: 0,
            actions: 0,
        }
    }

    pub fn for_env<E: Environment>(env: &E, config: AgentConfig<F>) -> Self {
        Self::new(env.kind(), env.action_names().len(), config)
    }

    pub fn config(&self) -> &AgentConfig<F> {
        &self.config
    }

    pub fn theory(&self) -> &Theory {
        &self.theory
    }

    pub fn map(&self) -> &RegionMap {
        &self.map
    }

    pub fn policies(&self) -> &PolicyStore<F> {
        &self.policies
    }

    pub fn total_actions(&self) -> u64 {
        self.actions
    }

    /// Build theory and map from every demonstrated transition. Policies
    /// are left untouched.
    pub fn ingest_demonstration(&mut self, demo: &Demonstration) -> Result<(), DemonstrationError> {
        if demo.env != self.env {
            return Err(DemonstrationError::WrongEnvironment {
                expected: self.env,
                found: demo.env,
            });
        }
        for pair in demo.states.windows(2) {
            let events = self.env.events(&pair[0], &pair[1]);
            self.map.update(&pair[0], &pair[1]);
            self.theory.update(&pair[0], &pair[1], &events);
        }
        Ok(())
    }

    pub fn run_attempt<E: Environment, R: Rng + ?Sized>(&mut self, env: &mut E, env_seed: u64, rng: &mut R) -> AttemptRecord {
        self.run_attempt_observed(env, env_seed, rng, |_| {})
    }

    pub fn run_attempt_observed<E, R, O>(&mut self, env: &mut E, env_seed: u64, rng: &mut R, mut observe: O) -> AttemptRecord
    where
        E: Environment,
        R: Rng + ?Sized,
        O: FnMut(&StepInfo<'_>),
    {
        let started = Instant::now();
        let actions = env.actions();
        let mut s = env.reset(env_seed);
        let mut steps = 0;
        while !s.terminal && steps < self.config.tau {
            let failure_causes = self.theory.causes(&Effect::Failure);
            let anti = instances(&s, &failure_causes);
            let contributors = self.theory.contributors(&s, &Effect::Success);
            let objectives = instances(&s, &contributors);
            let pursuit = self
                .map
                .choose_objective(&objectives, &s, rng)
                .ok()
                .map(|o| self.map.first_checkpoint(o, &s));

            let cfg = &self.config.policy;
            let a = self.policies.choose_action(&s, pursuit.as_ref(), &anti, &actions, rng, cfg);
            let t = env.step(a).expect("agent acts only in live states with legal actions");
            steps += 1;

            self.map.update(&s, &t.state);
            self.theory.update(&s, &t.state, &t.events);
            self.policies
                .update(&s, a, &t.state, pursuit.as_ref(), &anti, &t.events, &self.config.policy);

            observe(&StepInfo {
                step: steps,
                state: &s,
                pursuit: pursuit.as_ref(),
                anti_objectives: &anti,
                action: a,
                next: &t.state,
                events: &t.events,
            });
            s = t.state;
        }

        self.actions += steps;
        let outcome = match s.feedback {
            Feedback::Success => Outcome::Success,
            Feedback::Failure => Outcome::Failure,
            Feedback::None => Outcome::Timeout,
        };
        let record = AttemptRecord {
            index: self.attempts,
            outcome,
            steps,
            cumulative_actions: self.actions,
            wall_time: started.elapsed().as_secs_f64(),
        };
        self.attempts += 1;
        record
    }
}
