//! Demonstration sources: scripted people for both environments, and a
//! trained Taxi Q-learner used as a demonstrator for the baselines.

use std::path::Path;

use anyhow::{bail, Context};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use rfd::agent::Demonstration;
use rfd::baselines::{BaselineAgent, BaselineConfig, BaselineKind, DemoPolicy, FeatureState};
use rfd::demo::{parse_demo, record_episode, record_policy, scripted_courier_actions, scripted_taxi_actions, write_demo};
use rfd::env::{ActionId, CourierConfig, CourierEnv, EnvKind, TaxiEnv, TAXI_MAX_STEPS};
use rfd::perception::PerceivedState;

pub const TEACHER_ACTIONS: u64 = 400_000;
pub const TEACHER_SEED: u64 = 999;
pub const DEMO_SEED_BASE: u64 = 20_000_000;

pub fn load_demo(path: &Path, env: Option<EnvKind>) -> anyhow::Result<Demonstration> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_demo(&text, env).with_context(|| format!("in {}", path.display()))
}

pub fn load_demo_policy(paths: &[impl AsRef<Path>]) -> anyhow::Result<DemoPolicy> {
    let mut policy = DemoPolicy::new();
    for path in paths {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let part = DemoPolicy::from_text(&text).with_context(|| format!("in {}", path.display()))?;
        for (s, a) in part.iter() {
            policy.insert(s, a);
        }
    }
    Ok(policy)
}

/// States of the scripted episode from `seed`.
pub fn scripted_states(env: EnvKind, courier: &CourierConfig, seed: u64) -> anyhow::Result<Vec<PerceivedState>> {
    match env {
        EnvKind::Taxi => {
            let mut e = TaxiEnv::new();
            let actions = scripted_taxi_actions(&mut e, seed);
            Ok(record_episode(&mut e, seed, &actions)?)
        }
        EnvKind::Courier => {
            let mut e = CourierEnv::new(courier.clone());
            let actions = scripted_courier_actions(&mut e, seed, 20_000)?;
            Ok(record_episode(&mut e, seed, &actions)?)
        }
    }
}

/// Plain Q-learner trained on Taxi for `actions` actions.
pub fn train_teacher(actions: u64, seed: u64) -> BaselineAgent<f64> {
    let cfg = BaselineConfig {
        evaluate: false,
        ..BaselineConfig::default()
    };
    let mut teacher = BaselineAgent::new(BaselineKind::QLearning, cfg, &DemoPolicy::new());
    let mut env = TaxiEnv::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut episode = 0;
    while teacher.total_actions() < actions {
        teacher.run_episode(&mut env, seed.wrapping_mul(1_000_003).wrapping_add(episode), &mut rng);
        episode += 1;
    }
    teacher
}

/// The first `count` successful greedy episodes from consecutive seeds
/// starting at `first_seed`, with the seed each came from.
pub fn teacher_demonstrations(
    teacher: &BaselineAgent<f64>,
    count: usize,
    first_seed: u64,
) -> Vec<(u64, Vec<(FeatureState, ActionId)>)> {
    let mut out = Vec::new();
    let mut seed = first_seed;
    while out.len() < count {
        let (pairs, _, ok) = teacher.greedy_trajectory(seed);
        if ok {
            out.push((seed, pairs));
        }
        seed += 1;
        assert!(seed - first_seed < 100 * count as u64 + 1000, "teacher rarely succeeds");
    }
    out
}

/// Demonstration file of one greedy teacher episode.
pub fn record_teacher_demo(teacher: &BaselineAgent<f64>, seed: u64) -> anyhow::Result<String> {
    let mut env = TaxiEnv::new();
    let (states, _) = record_policy(&mut env, seed, TAXI_MAX_STEPS as usize, |env, _| {
        teacher.greedy_action(FeatureState::of(env))
    })
    .with_context(|| format!("teacher episode from seed {seed} did not deliver"))?;
    Ok(write_demo(EnvKind::Taxi, &states))
}

pub fn policy_text(pairs: &[(FeatureState, ActionId)]) -> String {
    let mut p = DemoPolicy::new();
    p.extend(pairs);
    p.to_text()
}

pub fn record_scripted(env: EnvKind, courier: &CourierConfig, seed: u64) -> anyhow::Result<String> {
    let states = scripted_states(env, courier, seed)?;
    if states.last().is_none_or(|s| s.feedback != rfd::perception::Feedback::Success) {
        bail!("scripted episode from seed {seed} did not succeed");
    }
    Ok(write_demo(env, &states))
}
