//! Region connectivity learned from observed crossings, and the planning
//! queries built on it: objective path lengths, objective selection and
//! first-checkpoint decomposition.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};
use std::fmt;

use rand::Rng;
use thiserror::Error;

use crate::perception::{self, FocusState, ObjectType, PerceivedState, PossibleEvent, RegionId, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegionTransition {
    pub from: RegionId,
    pub to: RegionId,
    /// Where the crossing was first observed (a cell of `to`).
    pub crossing: Vec2,
}

impl fmt::Display for RegionTransition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} @ {}", self.from, self.to, self.crossing)
    }
}

/// At most one stored crossing per ordered region pair.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RegionMap {
    transitions: BTreeMap<(RegionId, RegionId), Vec2>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no objective to choose from")]
pub struct NoObjective;

/// Shortest actor-to-subject route through stored crossings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Route {
    pub length: u32,
    /// First crossing, oriented in the direction of travel. `None` when the
    /// endpoints share a region.
    pub first: Option<RegionTransition>,
}

impl RegionMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn transitions(&self) -> impl Iterator<Item = RegionTransition> + '_ {
        self.transitions
            .iter()
            .map(|(&(from, to), &crossing)| RegionTransition { from, to, crossing })
    }

    pub fn get(&self, from: RegionId, to: RegionId) -> Option<Vec2> {
        self.transitions.get(&(from, to)).copied()
    }

    /// Returns whether the transition was new.
    pub fn insert(&mut self, t: RegionTransition) -> bool {
        if t.from == t.to || self.transitions.contains_key(&(t.from, t.to)) {
            return false;
        }
        self.transitions.insert((t.from, t.to), t.crossing);
        true
    }

    /// Record every region change of an object present in both states.
    pub fn update(&mut self, before: &PerceivedState, after: &PerceivedState) {
        for object in before.objects() {
            if let Some(later) = after.object(object.id) {
                if object.region != later.region {
                    self.insert(RegionTransition {
                        from: object.region,
                        to: later.region,
                        crossing: later.location,
                    });
                }
            }
        }
    }

    /// Dijkstra over (waypoint, current region) pairs. Every stored crossing
    /// is a waypoint usable in either direction; passing through it switches
    /// the traveller to the region on its other side.
    pub fn route(&self, start: (Vec2, RegionId), goal: (Vec2, RegionId)) -> Option<Route> {
        let crossings: Vec<RegionTransition> = self.transitions().collect();
        // Node 0 is the start. Node 1 + 2i is crossing i entered from its
        // `from` side (now in `to`); node 2 + 2i is the reverse.
        let n = 1 + 2 * crossings.len();
        let goal_node = n;
        let position = |node: usize| -> (Vec2, RegionId) {
            if node == 0 {
                return start;
            }
            let c = crossings[(node - 1) / 2];
            if node % 2 == 1 {
                (c.crossing, c.to)
            } else {
                (c.crossing, c.from)
            }
        };

        let mut dist = vec![u32::MAX; n + 1];
        let mut pred = vec![usize::MAX; n + 1];
        let mut heap = BinaryHeap::new();
        dist[0] = 0;
        heap.push(Reverse((0u32, 0usize)));
        while let Some(Reverse((d, node))) = heap.pop() {
            if d > dist[node] {
                continue;
            }
            if node == goal_node {
                break;
            }
            let (here, region) = position(node);
            let mut relax = |next: usize, cost: u32, heap: &mut BinaryHeap<Reverse<(u32, usize)>>| {
                let nd = d + cost;
                if nd < dist[next] {
                    dist[next] = nd;
                    pred[next] = node;
                    heap.push(Reverse((nd, next)));
                }
            };
            if region == goal.1 {
                relax(goal_node, here.manhattan(goal.0), &mut heap);
            }
            for (i, c) in crossings.iter().enumerate() {
                if c.from == region {
                    relax(1 + 2 * i, here.manhattan(c.crossing), &mut heap);
                } else if c.to == region {
                    relax(2 + 2 * i, here.manhattan(c.crossing), &mut heap);
                }
            }
        }

        if dist[goal_node] == u32::MAX {
            return None;
        }
        let mut node = goal_node;
        let mut first = None;
        while pred[node] != usize::MAX {
            if pred[node] == 0 && node != goal_node {
                let c = crossings[(node - 1) / 2];
                first = Some(if node % 2 == 1 {
                    c
                } else {
                    RegionTransition {
                        from: c.to,
                        to: c.from,
                        crossing: c.crossing,
                    }
                });
            }
            node = pred[node];
        }
        Some(Route {
            length: dist[goal_node],
            first,
        })
    }

    fn endpoints(event: &PossibleEvent, state: &PerceivedState) -> Option<((Vec2, RegionId), (Vec2, RegionId))> {
        let actor = state.object(event.actor.id)?;
        let subject = state.object(event.subject.as_ref()?.id)?;
        Some(((actor.location, actor.region), (subject.location, subject.region)))
    }

    /// `None` means unreachable with the crossings known so far.
    pub fn path_length(&self, event: &PossibleEvent, state: &PerceivedState) -> Option<u32> {
        if event.subject.is_none() {
            return perception::distance(state, event).ok();
        }
        let (start, goal) = Self::endpoints(event, state)?;
        self.route(start, goal).map(|r| r.length)
    }

    /// Uniformly random objective among those with minimal path length.
    /// If none is reachable, minimal raw distance decides instead.
    pub fn choose_objective<'a, R: Rng + ?Sized>(
        &self,
        objectives: &'a [PossibleEvent],
        state: &PerceivedState,
        rng: &mut R,
    ) -> Result<&'a PossibleEvent, NoObjective> {
        if objectives.is_empty() {
            return Err(NoObjective);
        }
        let lengths: Vec<Option<u32>> = objectives.iter().map(|o| self.path_length(o, state)).collect();
        let scores: Vec<u32> = if lengths.iter().any(Option::is_some) {
            lengths.iter().map(|l| l.unwrap_or(u32::MAX)).collect()
        } else {
            objectives
                .iter()
                .map(|o| perception::distance(state, o).unwrap_or(u32::MAX))
                .collect()
        };
        let best = *scores.iter().min().expect("non-empty");
        let ties: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] == best).collect();
        Ok(&objectives[ties[rng.gen_range(0..ties.len())]])
    }

    /// Replace a multi-regional objective by a checkpoint at the first
    /// crossing of its shortest route. Unreachable or single-region
    /// objectives come back unchanged.
    pub fn first_checkpoint(&self, objective: &PossibleEvent, state: &PerceivedState) -> Pursuit {
        let unchanged = || Pursuit::Event(objective.clone());
        let Some((start, goal)) = Self::endpoints(objective, state) else {
            return unchanged();
        };
        if start.1 == goal.1 {
            return unchanged();
        }
        match self.route(start, goal).and_then(|r| r.first) {
            Some(target) => Pursuit::Checkpoint(Checkpoint {
                base: objective.clone(),
                target,
            }),
            None => unchanged(),
        }
    }

    /// One line per transition, `R_from -> R_to @ (row,col)`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for t in self.transitions() {
            out.push_str(&t.to_string());
            out.push('\n');
        }
        out
    }
}

/// Intermediate objective: move the base objective's actor across `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub base: PossibleEvent,
    pub target: RegionTransition,
}

impl Checkpoint {
    pub fn actor_type(&self) -> &ObjectType {
        &self.base.actor.kind
    }
}

/// What the agent is currently steering towards.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Pursuit {
    Event(PossibleEvent),
    Checkpoint(Checkpoint),
}

impl Pursuit {
    pub fn actor_id(&self) -> perception::ObjectId {
        match self {
            Pursuit::Event(e) => e.actor.id,
            Pursuit::Checkpoint(c) => c.base.actor.id,
        }
    }

    /// Distance to completion; checkpoints measure actor to crossing cell.
    pub fn distance(&self, state: &PerceivedState) -> Option<u32> {
        match self {
            Pursuit::Event(e) => perception::distance(state, e).ok(),
            Pursuit::Checkpoint(c) => state
                .object(c.base.actor.id)
                .map(|a| a.location.manhattan(c.target.crossing)),
        }
    }

    /// Checkpoints treat the crossing cell as a stationary subject.
    pub fn focus(&self, state: &PerceivedState) -> Option<FocusState> {
        match self {
            Pursuit::Event(e) => perception::focus(state, e).ok(),
            Pursuit::Checkpoint(c) => state.object(c.base.actor.id).map(|a| FocusState {
                actor_velocity: a.velocity,
                subject_velocity: Some(Vec2::ZERO),
                actor_position: a.location - c.target.crossing,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::fixtures::{obj, state};
    use crate::perception::{EventTemplate, ObjectView};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: u16) -> RegionId {
        RegionId(n)
    }

    fn t(from: u16, to: u16, row: i32, col: i32) -> RegionTransition {
        RegionTransition {
            from: r(from),
            to: r(to),
            crossing: Vec2::new(row, col),
        }
    }

    fn meet(actor: ObjectView, subject: ObjectView) -> (PossibleEvent, PerceivedState) {
        let s = state(vec![actor.clone(), subject.clone()]);
        let tmpl = EventTemplate::new("meets", actor.kind.as_str(), Some(subject.kind.as_str()));
        (perception::instances(&s, [&tmpl]).remove(0), s)
    }

    #[test]
    fn first_crossing_is_stored() {
        let mut map = RegionMap::new();
        let s = state(vec![obj(1, "Taxi", 4, 0, 1)]);
        let s2 = state(vec![obj(1, "Taxi", 3, 1, 2)]);
        map.update(&s, &s2);
        assert_eq!(map.get(r(1), r(2)), Some(Vec2::new(3, 1)));
        assert_eq!(map.dump(), "1 -> 2 @ (3,1)\n");

        let s3 = state(vec![obj(1, "Taxi", 2, 1, 1)]);
        let s4 = state(vec![obj(1, "Taxi", 2, 2, 2)]);
        map.update(&s3, &s4);
        assert_eq!(map.len(), 1);
        assert_eq!(map.get(r(1), r(2)), Some(Vec2::new(3, 1)));
    }

    #[test]
    fn staying_put_changes_nothing() {
        let mut map = RegionMap::new();
        let s = state(vec![obj(1, "Taxi", 0, 0, 0)]);
        let s2 = state(vec![obj(1, "Taxi", 1, 0, 0)]);
        map.update(&s, &s2);
        assert!(map.is_empty());
    }

    #[test]
    fn path_length_same_region() {
        let map = RegionMap::new();
        let (e, s) = meet(obj(1, "A", 0, 0, 0), obj(2, "B", 2, 2, 0));
        assert_eq!(map.path_length(&e, &s), Some(4));
    }

    #[test]
    fn path_length_through_crossing() {
        let mut map = RegionMap::new();
        map.insert(t(1, 2, 3, 1));
        let (e, s) = meet(obj(1, "A", 4, 0, 1), obj(2, "B", 0, 1, 2));
        assert_eq!(map.path_length(&e, &s), Some(5));
    }

    #[test]
    fn path_length_unreachable() {
        let mut map = RegionMap::new();
        map.insert(t(1, 2, 3, 1));
        let (e, s) = meet(obj(1, "A", 4, 0, 1), obj(2, "B", 0, 1, 3));
        assert_eq!(map.path_length(&e, &s), None);
    }

    #[test]
    fn reverse_crossing_is_usable() {
        let mut map = RegionMap::new();
        map.insert(t(1, 2, 3, 1));
        let (e, s) = meet(obj(1, "A", 0, 1, 2), obj(2, "B", 4, 0, 1));
        assert_eq!(map.path_length(&e, &s), Some(5));
        match map.first_checkpoint(&e, &s) {
            Pursuit::Checkpoint(c) => assert_eq!(c.target, t(2, 1, 3, 1)),
            other => panic!("expected checkpoint, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_targets_first_crossing() {
        let mut map = RegionMap::new();
        map.insert(t(1, 2, 0, 5));
        map.insert(t(2, 3, 0, 10));
        map.insert(t(1, 3, 20, 20));
        let (e, s) = meet(obj(1, "A", 0, 0, 1), obj(2, "B", 0, 12, 3));
        assert_eq!(map.path_length(&e, &s), Some(12));
        match map.first_checkpoint(&e, &s) {
            Pursuit::Checkpoint(c) => {
                assert_eq!(c.target, t(1, 2, 0, 5));
                assert_eq!(c.target.from, s.object(c.base.actor.id).unwrap().region);
            }
            other => panic!("expected checkpoint, got {other:?}"),
        }
    }

    #[test]
    fn checkpoint_fallbacks() {
        let map = RegionMap::new();
        let (e, s) = meet(obj(1, "A", 0, 0, 1), obj(2, "B", 0, 12, 3));
        assert_eq!(map.first_checkpoint(&e, &s), Pursuit::Event(e.clone()));
        let (e, s) = meet(obj(1, "A", 0, 0, 1), obj(2, "B", 0, 4, 1));
        assert_eq!(map.first_checkpoint(&e, &s), Pursuit::Event(e.clone()));
    }

    fn objectives_at(subjects: &[(i32, i32, u16)]) -> (Vec<PossibleEvent>, PerceivedState) {
        let mut objects = vec![obj(1, "A", 0, 0, 0)];
        for (i, &(row, col, region)) in subjects.iter().enumerate() {
            objects.push(obj(10 + i as u32, "B", row, col, region));
        }
        let s = state(objects);
        let tmpl = EventTemplate::new("meets", "A", Some("B"));
        (perception::instances(&s, [&tmpl]), s)
    }

    #[test]
    fn choose_objective_cases() {
        let map = RegionMap::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(map.choose_objective(&[], &state(vec![]), &mut rng), Err(NoObjective));

        let (objs, s) = objectives_at(&[(2, 3, 0)]);
        assert_eq!(map.choose_objective(&objs, &s, &mut rng).unwrap(), &objs[0]);

        let (objs, s) = objectives_at(&[(4, 5, 0), (2, 3, 0)]);
        assert_eq!(map.choose_objective(&objs, &s, &mut rng).unwrap(), &objs[1]);
    }

    #[test]
    fn choose_objective_breaks_ties_uniformly() {
        let map = RegionMap::new();
        let (objs, s) = objectives_at(&[(2, 3, 0), (3, 2, 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 10_000;
        let first = (0..n)
            .filter(|_| map.choose_objective(&objs, &s, &mut rng).unwrap() == &objs[0])
            .count();
        let freq = first as f64 / n as f64;
        assert!((freq - 0.5).abs() <= 0.05, "frequency {freq}");
    }

    #[test]
    fn unreachable_falls_back_to_raw_distance() {
        let map = RegionMap::new();
        let (objs, s) = objectives_at(&[(9, 9, 2), (1, 1, 3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(map.choose_objective(&objs, &s, &mut rng).unwrap(), &objs[1]);
    }

    #[test]
    fn reachable_beats_unreachable() {
        let mut map = RegionMap::new();
        map.insert(t(0, 2, 9, 0));
        let (objs, s) = objectives_at(&[(9, 9, 2), (1, 1, 3)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(map.choose_objective(&objs, &s, &mut rng).unwrap(), &objs[0]);
    }
}
