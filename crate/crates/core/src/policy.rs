//! Per-template tabular Q-functions, the self-generated shaped rewards that
//! train them, and reward-versus-risk action selection.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::ActionId;
use crate::perception::{Event, EventTemplate, FocusState, ObjectType, PerceivedState, PossibleEvent, RegionId};
use crate::region_map::Pursuit;
use crate::scalar::Scalar;

/// Learning-rate, discount, bonus and schedule parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PolicyConfig<F> {
    pub alpha: F,
    pub gamma: F,
    pub omega: F,
    pub eps_max: F,
    pub eps_min: F,
    pub lambda_eps: F,
    pub beta_max: F,
    pub lambda_beta: F,
}

impl<F: Scalar> Default for PolicyConfig<F> {
    fn default() -> Self {
        PolicyConfig {
            alpha: F::lit(0.1),
            gamma: F::lit(0.9),
            omega: F::lit(100.0),
            eps_max: F::lit(0.1),
            eps_min: F::lit(0.01),
            lambda_eps: F::lit(0.99),
            beta_max: F::lit(100.0),
            lambda_beta: F::lit(0.99),
        }
    }
}

impl<F: Scalar> PolicyConfig<F> {
    pub fn validate(&self) -> Result<(), String> {
        let zero = F::zero();
        let one = F::one();
        let mut problems = Vec::new();
        if !(self.alpha > zero && self.alpha <= one) {
            problems.push("alpha must lie in (0, 1]");
        }
        if !(self.gamma >= zero && self.gamma < one) {
            problems.push("gamma must lie in [0, 1)");
        }
        if !(self.omega > zero) {
            problems.push("omega must be positive");
        }
        if !(self.eps_min >= zero && self.eps_min <= self.eps_max && self.eps_max <= one) {
            problems.push("need 0 <= eps_min <= eps_max <= 1");
        }
        if !(self.lambda_eps > zero && self.lambda_eps < one) {
            problems.push("lambda_eps must lie in (0, 1)");
        }
        if !(self.beta_max > zero) {
            problems.push("beta_max must be positive");
        }
        if !(self.lambda_beta > zero && self.lambda_beta < one) {
            problems.push("lambda_beta must lie in (0, 1)");
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Key of one Q-function: an event template, or a directed region pair for
/// checkpoint navigation by one actor type.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolicyKey {
    Event(EventTemplate),
    Checkpoint {
        actor_type: ObjectType,
        from: RegionId,
        to: RegionId,
    },
}

impl PolicyKey {
    pub fn of(pursuit: &Pursuit) -> PolicyKey {
        match pursuit {
            Pursuit::Event(e) => PolicyKey::Event(e.template.clone()),
            Pursuit::Checkpoint(c) => PolicyKey::Checkpoint {
                actor_type: c.actor_type().clone(),
                from: c.target.from,
                to: c.target.to,
            },
        }
    }
}

impl fmt::Display for PolicyKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKey::Event(t) => t.fmt(f),
            PolicyKey::Checkpoint { actor_type, from, to } => {
                write!(f, "CHECKPOINT({actor_type}, {from}->{to})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable<F> {
    values: HashMap<FocusState, Vec<F>>,
    n_actions: usize,
    pub epsilon: F,
    pub beta: F,
}

impl<F: Scalar> QTable<F> {
    pub fn new(n_actions: usize, cfg: &PolicyConfig<F>) -> Self {
        QTable {
            values: HashMap::new(),
            n_actions,
            epsilon: cfg.eps_max,
            beta: cfg.beta_max,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Number of focus states with at least one stored value.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: &FocusState, a: ActionId) -> F {
        self.values
            .get(s)
            .map(|row| row[a.index()])
            .unwrap_or_else(F::zero)
    }

    pub fn max(&self, s: &FocusState) -> F {
        match self.values.get(s) {
            None => F::zero(),
            Some(row) => row.iter().copied().fold(F::neg_infinity(), F::max),
        }
    }

    /// Q-learning update. `next = None` marks a terminal transition for this
    /// Q-function (no bootstrap).
    pub fn update(&mut self, s: &FocusState, a: ActionId, r: F, next: Option<&FocusState>, cfg: &PolicyConfig<F>) {
        let future = next.map_or(F::zero(), |n| self.max(n));
        let n = self.n_actions;
        let cell = &mut self.values.entry(*s).or_insert_with(|| vec![F::zero(); n])[a.index()];
        *cell = (F::one() - cfg.alpha) * *cell + cfg.alpha * (r + cfg.gamma * future);
    }

    pub fn decay_epsilon(&mut self, cfg: &PolicyConfig<F>) {
        self.epsilon = (cfg.lambda_eps * self.epsilon).max(cfg.eps_min);
    }

    pub fn decay_beta(&mut self, cfg: &PolicyConfig<F>) {
        self.beta = (cfg.lambda_beta * self.beta).max(F::min_positive_value());
    }

    pub fn reset_beta(&mut self, cfg: &PolicyConfig<F>) {
        self.beta = cfg.beta_max;
    }

    /// Stored entries sorted by focus state.
    pub fn entries(&self) -> Vec<(FocusState, &[F])> {
        let mut out: Vec<_> = self.values.iter().map(|(k, v)| (*k, v.as_slice())).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }
}

/// Q-learning update as a free function over a single table.
pub fn q_update<F: Scalar>(
    table: &mut QTable<F>,
    s: &FocusState,
    a: ActionId,
    r: F,
    next: &FocusState,
    cfg: &PolicyConfig<F>,
) {
    table.update(s, a, r, Some(next), cfg);
}

/// A lazily populated Q-function per [`PolicyKey`].
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyStore<F> {
    tables: BTreeMap<PolicyKey, QTable<F>>,
    n_actions: usize,
}

impl<F: Scalar> PolicyStore<F> {
    pub fn new(n_actions: usize) -> Self {
        PolicyStore {
            tables: BTreeMap::new(),
            n_actions,
        }
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, key: &PolicyKey) -> Option<&QTable<F>> {
        self.tables.get(key)
    }

    pub fn table(&mut self, key: &PolicyKey, cfg: &PolicyConfig<F>) -> &mut QTable<F> {
        if !self.tables.contains_key(key) {
            self.tables.insert(key.clone(), QTable::new(self.n_actions, cfg));
        }
        self.tables.get_mut(key).expect("just inserted")
    }

    pub fn tables(&self) -> impl Iterator<Item = (&PolicyKey, &QTable<F>)> {
        self.tables.iter()
    }

    /// Adjust the objective's and every anti-objective's Q-function after
    /// taking `a` from `s` to `next`. Focus states are always computed from
    /// the raw perceived states.
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        s: &PerceivedState,
        a: ActionId,
        next: &PerceivedState,
        pursuit: Option<&Pursuit>,
        anti_objectives: &[PossibleEvent],
        events: &[Event],
        cfg: &PolicyConfig<F>,
    ) {
        if let Some(pursuit) = pursuit {
            self.update_pursuit(s, a, next, pursuit, events, cfg);
        }

        for anti in anti_objectives {
            let key = PolicyKey::Event(anti.template.clone());
            let Ok(here) = crate::perception::focus(s, anti) else {
                continue;
            };
            let table = self.table(&key, cfg);
            if anti.occurred_in(events) {
                table.update(&here, a, -cfg.omega, None, cfg);
            } else if anti.possible_in(next) {
                let there = crate::perception::focus(next, anti).ok();
                let bootstrap = if next.terminal { None } else { there.as_ref() };
                table.update(&here, a, F::zero(), bootstrap, cfg);
            }
        }
    }

    fn update_pursuit(
        &mut self,
        s: &PerceivedState,
        a: ActionId,
        next: &PerceivedState,
        pursuit: &Pursuit,
        events: &[Event],
        cfg: &PolicyConfig<F>,
    ) {
        let (Some(d0), Some(here)) = (pursuit.distance(s), pursuit.focus(s)) else {
            return;
        };
        let key = PolicyKey::of(pursuit);
        let delta = |d1: u32| F::lit(d0 as f64 - d1 as f64);
        let table = self.table(&key, cfg);

        match pursuit {
            Pursuit::Checkpoint(c) => {
                let id = c.base.actor.id;
                let (Some(before), Some(after)) = (s.object(id), next.object(id)) else {
                    return;
                };
                let d1 = after.location.manhattan(c.target.crossing);
                if after.region == c.target.to {
                    table.update(&here, a, delta(d1) + cfg.omega, None, cfg);
                    table.decay_epsilon(cfg);
                    table.reset_beta(cfg);
                } else if after.region != before.region {
                    table.update(&here, a, delta(d1) - cfg.omega, None, cfg);
                } else {
                    let there = pursuit.focus(next);
                    let bootstrap = if next.terminal { None } else { there.as_ref() };
                    table.update(&here, a, delta(d1), bootstrap, cfg);
                }
            }
            Pursuit::Event(e) => {
                if e.occurred_in(events) {
                    // Objects consumed by the interaction count as co-located.
                    let d1 = pursuit.distance(next).unwrap_or(0);
                    table.update(&here, a, delta(d1) + cfg.omega, None, cfg);
                    table.decay_epsilon(cfg);
                    table.reset_beta(cfg);
                } else if e.possible_in(next) {
                    let d1 = pursuit.distance(next).expect("possible implies present");
                    let there = pursuit.focus(next);
                    let bootstrap = if next.terminal { None } else { there.as_ref() };
                    table.update(&here, a, delta(d1), bootstrap, cfg);
                }
            }
        }
    }

    /// Explore: a uniformly random minimal-risk action with probability
    /// epsilon of the objective's table. Exploit: maximise
    /// `reward - beta * risk`, then decay that table's beta.
    /// Without an objective, always picks a random minimal-risk action.
    #[allow(clippy::too_many_arguments)]
    pub fn choose_action<R: Rng + ?Sized>(
        &mut self,
        s: &PerceivedState,
        pursuit: Option<&Pursuit>,
        anti_objectives: &[PossibleEvent],
        actions: &[ActionId],
        rng: &mut R,
        cfg: &PolicyConfig<F>,
    ) -> ActionId {
        assert!(!actions.is_empty(), "action set must be non-empty");
        let risk = self.risk(s, anti_objectives, actions);

        let focus = pursuit.and_then(|p| p.focus(s));
        let (Some(pursuit), Some(focus)) = (pursuit, focus) else {
            return pick_min(actions, &risk, rng);
        };
        let table = self.table(&PolicyKey::of(pursuit), cfg);
        let explore = rng.gen::<f64>() < table.epsilon.to_f64().unwrap_or(0.0);
        if explore {
            return pick_min(actions, &risk, rng);
        }
        let beta = table.beta;
        let scores: Vec<F> = actions
            .iter()
            .zip(&risk)
            .map(|(&a, &r)| table.get(&focus, a) - beta * r)
            .collect();
        table.decay_beta(cfg);
        pick_max(actions, &scores, rng)
    }

    /// Summed `-Q` of every anti-objective, per action.
    pub fn risk(&self, s: &PerceivedState, anti_objectives: &[PossibleEvent], actions: &[ActionId]) -> Vec<F> {
        let mut risk = vec![F::zero(); actions.len()];
        for anti in anti_objectives {
            let Some(table) = self.tables.get(&PolicyKey::Event(anti.template.clone())) else {
                continue;
            };
            let Ok(focus) = crate::perception::focus(s, anti) else {
                continue;
            };
            for (slot, &a) in risk.iter_mut().zip(actions) {
                *slot = *slot - table.get(&focus, a);
            }
        }
        risk
    }

    /// Text snapshot: `table <key>` headers followed by
    /// `<focus tuple> <action> <value>` rows.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for (key, table) in &self.tables {
            let _ = writeln!(out, "table {key} epsilon={} beta={}", table.epsilon, table.beta);
            for (focus, row) in table.entries() {
                let subject = focus
                    .subject_velocity
                    .map_or("-".to_string(), |v| v.to_string());
                for (a, v) in row.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{} {} {} {} {}",
                        focus.actor_velocity, subject, focus.actor_position, a, v
                    );
                }
            }
        }
        out
    }
}

fn pick_min<F: Scalar, R: Rng + ?Sized>(actions: &[ActionId], values: &[F], rng: &mut R) -> ActionId {
    let best = values.iter().copied().fold(F::infinity(), F::min);
    pick_where(actions, values, best, rng)
}

fn pick_max<F: Scalar, R: Rng + ?Sized>(actions: &[ActionId], values: &[F], rng: &mut R) -> ActionId {
    let best = values.iter().copied().fold(F::neg_infinity(), F::max);
    pick_where(actions, values, best, rng)
}

fn pick_where<F: Scalar, R: Rng + ?Sized>(actions: &[ActionId], values: &[F], target: F, rng: &mut R) -> ActionId {
    let ties: Vec<ActionId> = actions
        .iter()
        .zip(values)
        .filter(|(_, &v)| v == target)
        .map(|(&a, _)| a)
        .collect();
    if ties.is_empty() {
        // Only reachable with NaN values.
        return actions[rng.gen_range(0..actions.len())];
    }
    ties[rng.gen_range(0..ties.len())]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::fixtures::{obj, state};
    use crate::perception::{instances, Vec2};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fs(row: i32, col: i32) -> FocusState {
        FocusState {
            actor_velocity: Vec2::ZERO,
            subject_velocity: Some(Vec2::ZERO),
            actor_position: Vec2::new(row, col),
        }
    }

    fn cfg() -> PolicyConfig<f64> {
        PolicyConfig::default()
    }

    #[test]
    fn default_parameters() {
        let c = cfg();
        assert_eq!(
            (c.alpha, c.gamma, c.omega, c.eps_max, c.eps_min, c.lambda_eps, c.beta_max, c.lambda_beta),
            (0.1, 0.9, 100.0, 0.1, 0.01, 0.99, 100.0, 0.99)
        );
        assert!(c.validate().is_ok());
        let bad = PolicyConfig { gamma: 1.0, ..c };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn q_update_substitution() {
        let c = cfg();
        let mut t = QTable::new(4, &c);
        q_update(&mut t, &fs(0, 1), ActionId(2), 20.0, &fs(0, 0), &c);
        assert!((t.get(&fs(0, 1), ActionId(2)) - 2.0).abs() < 1e-12);

        let mut t = QTable::new(4, &c);
        q_update(&mut t, &fs(0, 1), ActionId(2), 0.0, &fs(0, 0), &c);
        assert_eq!(t.get(&fs(0, 1), ActionId(2)), 0.0);

        let mut t = QTable::new(2, &c);
        t.values.insert(fs(0, 1), vec![10.0, 0.0]);
        t.values.insert(fs(0, 0), vec![10.0, 3.0]);
        q_update(&mut t, &fs(0, 1), ActionId(0), -1.0, &fs(0, 0), &c);
        assert!((t.get(&fs(0, 1), ActionId(0)) - 9.8).abs() < 1e-12);
    }

    #[test]
    fn q_update_in_f32() {
        let c = PolicyConfig::<f32>::default();
        let mut t = QTable::new(1, &c);
        q_update(&mut t, &fs(0, 1), ActionId(0), 20.0, &fs(0, 0), &c);
        assert!((t.get(&fs(0, 1), ActionId(0)) - 2.0).abs() < 1e-6);
    }

    #[test]
    fn unvisited_reads_zero() {
        let t = QTable::<f64>::new(6, &cfg());
        assert_eq!(t.get(&fs(3, 3), ActionId(5)), 0.0);
        assert_eq!(t.max(&fs(3, 3)), 0.0);
    }

    #[test]
    fn schedules_stay_in_bounds() {
        let c = cfg();
        let mut t = QTable::<f64>::new(1, &c);
        for _ in 0..1000 {
            t.decay_epsilon(&c);
            t.decay_beta(&c);
        }
        assert_eq!(t.epsilon, c.eps_min);
        assert!(t.beta > 0.0);
        for _ in 0..100_000 {
            t.decay_beta(&c);
        }
        assert!(t.beta > 0.0);
        t.reset_beta(&c);
        assert_eq!(t.beta, c.beta_max);
    }

    fn taxi_pickup_scene(taxi_col: i32) -> (PerceivedState, PossibleEvent) {
        let s = state(vec![obj(1, "Taxi", 0, taxi_col, 0), obj(2, "Passenger", 0, 0, 0)]);
        let t = EventTemplate::new("picks", "Taxi", Some("Passenger"));
        let e = instances(&s, [&t]).remove(0);
        (s, e)
    }

    #[test]
    fn progress_reward_is_distance_gain() {
        let c = cfg();
        let mut store = PolicyStore::new(6);
        let (s, e) = taxi_pickup_scene(2);
        let (s2, _) = taxi_pickup_scene(1);
        let pursuit = Pursuit::Event(e.clone());
        store.update(&s, ActionId(3), &s2, Some(&pursuit), &[], &[], &c);
        let table = store.get(&PolicyKey::Event(e.template.clone())).unwrap();
        // r = 1, all-zero table: 0.1 * (1 + 0.9 * 0)
        assert!((table.get(&fs(0, 2), ActionId(3)) - 0.1).abs() < 1e-12);
        assert_eq!(table.epsilon, c.eps_max);
    }

    #[test]
    fn completion_adds_bonus_and_updates_schedules() {
        let c = cfg();
        let mut store = PolicyStore::new(6);
        let (s, e) = taxi_pickup_scene(0);
        let key = PolicyKey::Event(e.template.clone());
        store.table(&key, &c).beta = 5.0;
        let s2 = state(vec![obj(3, "Taxi+Passenger", 0, 0, 0), obj(4, "Stop", 0, 0, 0)]);
        let events = vec![Event::new("picks", &e.actor, e.subject.as_ref())];
        let pursuit = Pursuit::Event(e.clone());
        store.update(&s, ActionId(4), &s2, Some(&pursuit), &[], &events, &c);
        let table = store.get(&key).unwrap();
        assert!((table.get(&fs(0, 0), ActionId(4)) - 10.0).abs() < 1e-12);
        assert!((table.epsilon - 0.099).abs() < 1e-12);
        assert_eq!(table.beta, 100.0);
    }

    #[test]
    fn vanished_objective_is_not_updated() {
        let c = cfg();
        let mut store = PolicyStore::new(6);
        let (s, e) = taxi_pickup_scene(0);
        let s2 = state(vec![obj(1, "Taxi", 0, 0, 0)]);
        store.update(&s, ActionId(4), &s2, Some(&Pursuit::Event(e.clone())), &[], &[], &c);
        let table = store.get(&PolicyKey::Event(e.template)).unwrap();
        assert!(table.is_empty());
    }

    #[test]
    fn collision_penalises_anti_objective() {
        let c = cfg();
        let mut store = PolicyStore::new(4);
        let courier = obj(1, "Courier+1", 5, 5, 0);
        let vehicle = obj(2, "Vehicle", 5, 6, 0);
        let other = obj(3, "Vehicle", 20, 20, 1);
        let s = state(vec![courier.clone(), vehicle.clone(), other.clone()]);
        let t = EventTemplate::new("collides", "Courier+1", Some("Vehicle"));
        let antis = instances(&s, [&t]);
        let mut moved = courier.clone();
        moved.location = Vec2::new(5, 6);
        let s2 = PerceivedState::new(vec![moved, vehicle.clone(), other], crate::perception::Feedback::Failure, true);
        let events = vec![Event::new("collides", &courier, Some(&vehicle))];
        store.update(&s, ActionId(2), &s2, None, &antis, &events, &c);
        let table = store.get(&PolicyKey::Event(t)).unwrap();
        assert!((table.get(&fs(0, -1), ActionId(2)) + 10.0).abs() < 1e-12);
        assert_eq!(table.get(&fs(-15, -15), ActionId(2)), 0.0);
        let risk = store.risk(&s, &antis, &[ActionId(0), ActionId(1), ActionId(2), ActionId(3)]);
        assert_eq!(risk, vec![0.0, 0.0, 10.0, 0.0]);
    }

    #[test]
    fn exploit_trades_reward_against_risk() {
        // reward = (5, 5, 0), risk = (0.1, 0, 0), beta = 100 -> action 1.
        let c = PolicyConfig { eps_max: 0.0, eps_min: 0.0, ..cfg() };
        let mut store = PolicyStore::new(3);
        let (_, e) = taxi_pickup_scene(2);
        let pursuit = Pursuit::Event(e.clone());
        let key = PolicyKey::Event(e.template.clone());
        store.table(&key, &c).values.insert(fs(0, 2), vec![5.0, 5.0, 0.0]);

        let vehicle = obj(9, "Vehicle", 4, 4, 0);
        let s = state(vec![obj(1, "Taxi", 0, 2, 0), obj(2, "Passenger", 0, 0, 0), vehicle]);
        let danger = EventTemplate::new("hits", "Taxi", Some("Vehicle"));
        let antis = instances(&s, [&danger]);
        let anti_focus = crate::perception::focus(&s, &antis[0]).unwrap();
        store
            .table(&PolicyKey::Event(danger), &c)
            .values
            .insert(anti_focus, vec![-0.1, 0.0, 0.0]);

        let actions = [ActionId(0), ActionId(1), ActionId(2)];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..50 {
            store.table(&key, &c).reset_beta(&c);
            let a = store.choose_action(&s, Some(&pursuit), &antis, &actions, &mut rng, &c);
            assert_eq!(a, ActionId(1));
        }
        // Exploiting decays beta.
        store.table(&key, &c).reset_beta(&c);
        let a = store.choose_action(&s, Some(&pursuit), &antis, &actions, &mut rng, &c);
        assert_eq!(a, ActionId(1));
        assert!((store.get(&key).unwrap().beta - 99.0).abs() < 1e-9);
    }

    #[test]
    fn exploration_is_uniform_over_safest() {
        let c = PolicyConfig { eps_max: 1.0, ..cfg() };
        let mut store = PolicyStore::new(4);
        let vehicle = obj(9, "Vehicle", 4, 4, 0);
        let s = state(vec![obj(1, "Taxi", 0, 2, 0), obj(2, "Passenger", 0, 0, 0), vehicle]);
        let t = EventTemplate::new("picks", "Taxi", Some("Passenger"));
        let pursuit = Pursuit::Event(instances(&s, [&t]).remove(0));
        let danger = EventTemplate::new("hits", "Taxi", Some("Vehicle"));
        let antis = instances(&s, [&danger]);
        let anti_focus = crate::perception::focus(&s, &antis[0]).unwrap();
        store
            .table(&PolicyKey::Event(danger), &c)
            .values
            .insert(anti_focus, vec![-3.0, 0.0, 0.0, 0.0]);

        let actions: Vec<ActionId> = (0..4).map(ActionId).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut counts = [0usize; 4];
        let n = 10_000;
        for _ in 0..n {
            counts[store.choose_action(&s, Some(&pursuit), &antis, &actions, &mut rng, &c).index()] += 1;
        }
        assert_eq!(counts[0], 0);
        for &k in &counts[1..] {
            let freq = k as f64 / n as f64;
            assert!((freq - 1.0 / 3.0).abs() <= 0.02, "frequency {freq}");
        }
    }

    #[test]
    fn no_risk_exploit_takes_best_reward() {
        let c = PolicyConfig { eps_max: 0.0, eps_min: 0.0, ..cfg() };
        let mut store = PolicyStore::new(3);
        let (s, e) = taxi_pickup_scene(2);
        let key = PolicyKey::Event(e.template.clone());
        store.table(&key, &c).values.insert(fs(0, 2), vec![1.0, 7.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let actions = [ActionId(0), ActionId(1), ActionId(2)];
        let a = store.choose_action(&s, Some(&Pursuit::Event(e)), &[], &actions, &mut rng, &c);
        assert_eq!(a, ActionId(1));
    }
}
