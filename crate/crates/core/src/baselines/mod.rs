//! Reward-driven Taxi baselines on the traditional four-feature state:
//! plain Q-learning, imitation, and a fixed two-subtask decomposition.

mod features;
mod learners;

pub use features::{FeatureState, OptimalReturns, N_FEATURE_STATES};
pub use learners::{BaselineAgent, BaselineConfig, BaselineKind, EpisodeRecord};

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::env::{ActionId, TaxiAction};

/// Demonstrated actions keyed by feature state. The first action recorded
/// for a state wins; insertion order is kept.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DemoPolicy {
    actions: BTreeMap<FeatureState, ActionId>,
    order: Vec<FeatureState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct DemoPolicyError {
    pub line: usize,
    pub message: String,
}

impl DemoPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the state already had an action.
    pub fn insert(&mut self, state: FeatureState, action: ActionId) -> bool {
        if self.actions.contains_key(&state) {
            return false;
        }
        self.actions.insert(state, action);
        self.order.push(state);
        true
    }

    pub fn extend(&mut self, trajectory: &[(FeatureState, ActionId)]) {
        for &(s, a) in trajectory {
            self.insert(s, a);
        }
    }

    pub fn get(&self, state: &FeatureState) -> Option<ActionId> {
        self.actions.get(state).copied()
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    /// Entries in the order they were first recorded.
    pub fn iter(&self) -> impl Iterator<Item = (FeatureState, ActionId)> + '_ {
        self.order.iter().map(|s| (*s, self.actions[s]))
    }

    /// `taxi_row taxi_col passenger destination action` per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, a) in self.iter() {
            let _ = writeln!(out, "{} {} {} {} {}", s.taxi_row, s.taxi_col, s.passenger, s.destination, a.0);
        }
        out
    }

    /// Accepts numeric action ids or action names.
    pub fn from_text(text: &str) -> Result<Self, DemoPolicyError> {
        let mut policy = DemoPolicy::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |message: String| DemoPolicyError { line: line_no, message };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            let [row, col, passenger, destination, action] = fields[..] else {
                return Err(err(format!("expected 5 fields, found {}", fields.len())));
            };
            let num = |s: &str| s.parse::<u8>().map_err(|_| err(format!("bad number `{s}`")));
            let state = FeatureState::new(num(row)?, num(col)?, num(passenger)?, num(destination)?)
                .ok_or_else(|| err("feature values out of range".into()))?;
            let action = match action.parse::<u8>() {
                Ok(id) if (id as usize) < TaxiAction::ALL.len() => ActionId(id),
                Ok(id) => return Err(err(format!("action id {id} out of range"))),
                Err(_) => TaxiAction::from_name(action)
                    .ok_or_else(|| err(format!("unknown action `{action}`")))?
                    .id(),
            };
            policy.insert(state, action);
        }
        Ok(policy)
    }
}
