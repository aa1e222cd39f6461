use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{DemoPolicy, FeatureState, N_FEATURE_STATES};
use crate::env::{ActionId, Environment, TaxiAction, TaxiEnv, TAXI_MAX_STEPS};
use crate::scalar::Scalar;

const N_ACTIONS: usize = TaxiAction::ALL.len();
/// Cells times the one feature each subtask keeps.
const SUBTASK_STATES: usize = 25 * 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineKind {
    #[serde(rename = "qlearning")]
    QLearning,
    Imitation,
    Decomposition,
}

impl BaselineKind {
    pub fn name(self) -> &'static str {
        match self {
            BaselineKind::QLearning => "qlearning",
            BaselineKind::Imitation => "imitation",
            BaselineKind::Decomposition => "decomposition",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineConfig<F> {
    pub alpha: F,
    pub gamma: F,
    pub epsilon: F,
    /// Run a greedy rollout from each episode's start for evaluation.
    pub evaluate: bool,
}

impl<F: Scalar> Default for BaselineConfig<F> {
    fn default() -> Self {
        BaselineConfig {
            alpha: F::lit(0.1),
            gamma: F::lit(0.9),
            epsilon: F::lit(0.1),
            evaluate: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub index: usize,
    pub start: (u8, u8, u8, u8),
    pub steps: u32,
    #[serde(rename = "return")]
    pub episode_return: f64,
    pub success: bool,
    pub cumulative_actions: u64,
    /// Return of the current greedy policy from the same start.
    pub greedy_return: Option<f64>,
}

impl EpisodeRecord {
    pub fn start_state(&self) -> FeatureState {
        let (r, c, p, d) = self.start;
        FeatureState::new(r, c, p, d).expect("recorded from a live state")
    }
}

#[derive(Debug, Clone)]
struct SubLearner<F> {
    q: Vec<F>,
    demo: HashMap<usize, ActionId>,
}

impl<F: Scalar> SubLearner<F> {
    fn new(states: usize) -> Self {
        SubLearner {
            q: vec![F::zero(); states * N_ACTIONS],
            demo: HashMap::new(),
        }
    }

    fn row(&self, x: usize) -> &[F] {
        &self.q[x * N_ACTIONS..(x + 1) * N_ACTIONS]
    }

    fn max(&self, x: usize) -> F {
        self.row(x).iter().copied().fold(F::neg_infinity(), F::max)
    }
}

/// Tabular learner over feature states. `Imitation` follows its demo policy
/// in demonstrated states when not exploring; `Decomposition` additionally
/// splits the task at pickup into two imitation learners on abstracted
/// states.
#[derive(Debug, Clone)]
pub struct BaselineAgent<F> {
    kind: BaselineKind,
    config: BaselineConfig<F>,
    learners: Vec<SubLearner<F>>,
    episodes: usize,
    actions: u64,
}

impl<F: Scalar> BaselineAgent<F> {
    pub fn new(kind: BaselineKind, config: BaselineConfig<F>, demo: &DemoPolicy) -> Self {
        let sizes: &[usize] = match kind {
            BaselineKind::Decomposition => &[SUBTASK_STATES, SUBTASK_STATES],
            _ => &[N_FEATURE_STATES],
        };
        let mut agent = BaselineAgent {
            kind,
            config,
            learners: sizes.iter().map(|&n| SubLearner::new(n)).collect(),
            episodes: 0,
            actions: 0,
        };
        if kind != BaselineKind::QLearning {
            for (s, a) in demo.iter() {
                if s.is_terminal() {
                    continue;
                }
                let (l, x) = agent.route(s);
                agent.learners[l].demo.entry(x).or_insert(a);
            }
        }
        agent
    }

    pub fn kind(&self) -> BaselineKind {
        self.kind
    }

    pub fn total_actions(&self) -> u64 {
        self.actions
    }

    /// Sizes of the state spaces, one per learner.
    pub fn table_sizes(&self) -> Vec<usize> {
        self.learners.iter().map(|l| l.q.len() / N_ACTIONS).collect()
    }

    pub fn demonstrated_states(&self) -> usize {
        self.learners.iter().map(|l| l.demo.len()).sum()
    }

    /// Which learner handles `s`, and its abstract state there.
    pub fn route(&self, s: FeatureState) -> (usize, usize) {
        match self.kind {
            BaselineKind::Decomposition if s.passenger < 4 => (0, pickup_state(s)),
            BaselineKind::Decomposition => (1, dropoff_state(s)),
            _ => (0, s.index()),
        }
    }

    pub fn q_values(&self, s: FeatureState) -> &[F] {
        let (l, x) = self.route(s);
        self.learners[l].row(x)
    }

    /// Demonstrated action if any, otherwise the lowest-index greedy one.
    pub fn greedy_action(&self, s: FeatureState) -> ActionId {
        let (l, x) = self.route(s);
        let learner = &self.learners[l];
        if let Some(&a) = learner.demo.get(&x) {
            return a;
        }
        let row = learner.row(x);
        let best = learner.max(x);
        ActionId(row.iter().position(|&v| v == best).expect("non-empty row") as u8)
    }

    fn choose<R: Rng + ?Sized>(&self, s: FeatureState, rng: &mut R) -> ActionId {
        let explore = rng.gen::<f64>() < self.config.epsilon.to_f64().unwrap_or(0.0);
        if explore {
            return ActionId(rng.gen_range(0..N_ACTIONS as u8));
        }
        let (l, x) = self.route(s);
        let learner = &self.learners[l];
        if let Some(&a) = learner.demo.get(&x) {
            return a;
        }
        let row = learner.row(x);
        let best = learner.max(x);
        let ties: Vec<usize> = (0..N_ACTIONS).filter(|&a| row[a] == best).collect();
        ActionId(ties[rng.gen_range(0..ties.len())] as u8)
    }

    fn learn(&mut self, s: FeatureState, a: ActionId, r: F, next: FeatureState, delivered: bool) {
        let (l, x) = self.route(s);
        let (l_next, _) = self.route(next);
        let finished_subtask = self.kind == BaselineKind::Decomposition && l == 0 && l_next == 1;
        let bootstrap = if delivered || finished_subtask {
            F::zero()
        } else {
            // After a drop at the wrong stop the dropoff learner reads the
            // new state through its own abstraction.
            let y = match (self.kind, l) {
                (BaselineKind::Decomposition, 1) => dropoff_state(next),
                (BaselineKind::Decomposition, _) => pickup_state(next),
                _ => next.index(),
            };
            self.learners[l].max(y)
        };
        let (alpha, gamma) = (self.config.alpha, self.config.gamma);
        let q = &mut self.learners[l].q[x * N_ACTIONS + a.index()];
        *q = (F::one() - alpha) * *q + alpha * (r + gamma * bootstrap);
    }

    /// One training episode from `env.reset(seed)`. The 200-action cut is a
    /// truncation, so its last update still bootstraps.
    pub fn run_episode<R: Rng + ?Sized>(&mut self, env: &mut TaxiEnv, seed: u64, rng: &mut R) -> EpisodeRecord {
        env.reset(seed);
        let start = FeatureState::of(env);
        let mut s = start;
        let mut total = 0.0;
        let mut steps = 0;
        while !env.is_done() {
            let a = self.choose(s, rng);
            let t = env.step(a).expect("episode is live");
            let next = FeatureState::of(env);
            self.learn(s, a, F::lit(t.reward), next, env.is_success());
            total += t.reward;
            steps += 1;
            s = next;
        }
        self.actions += steps as u64;
        let greedy_return = self.config.evaluate.then(|| self.greedy_return(seed));
        let record = EpisodeRecord {
            index: self.episodes,
            start: (start.taxi_row, start.taxi_col, start.passenger, start.destination),
            steps,
            episode_return: total,
            success: env.is_success(),
            cumulative_actions: self.actions,
            greedy_return,
        };
        self.episodes += 1;
        record
    }

    /// Return of the greedy policy from `reset(seed)`; no learning.
    pub fn greedy_return(&self, seed: u64) -> f64 {
        self.greedy_trajectory(seed).1
    }

    /// Greedy episode from `reset(seed)` as feature-state/action pairs, with
    /// its return and whether it delivered.
    pub fn greedy_trajectory(&self, seed: u64) -> (Vec<(FeatureState, ActionId)>, f64, bool) {
        let mut env = TaxiEnv::new();
        env.reset(seed);
        let mut pairs = Vec::new();
        let mut total = 0.0;
        while !env.is_done() && pairs.len() < TAXI_MAX_STEPS as usize {
            let s = FeatureState::of(&env);
            let a = self.greedy_action(s);
            total += env.step(a).expect("episode is live").reward;
            pairs.push((s, a));
        }
        (pairs, total, env.is_success())
    }
}

fn pickup_state(s: FeatureState) -> usize {
    debug_assert!(s.passenger < 4);
    (s.taxi_row as usize * 5 + s.taxi_col as usize) * 4 + s.passenger as usize
}

fn dropoff_state(s: FeatureState) -> usize {
    (s.taxi_row as usize * 5 + s.taxi_col as usize) * 4 + s.destination as usize
}
