//! Falsifiable cause -> effect hypotheses induced from observed transitions.

use std::collections::BTreeSet;
use std::fmt;

use crate::perception::{template_of, Event, EventTemplate, Feedback, ObjectType, PerceivedState};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Effect {
    /// An object of this type appeared.
    Object(ObjectType),
    Success,
    Failure,
}

impl Effect {
    pub fn object(kind: &str) -> Self {
        Effect::Object(ObjectType::new(kind))
    }

    /// Whether this effect happened across `before -> after`. Object effects
    /// require a genuine appearance, not mere presence.
    pub fn occurred(&self, before: &PerceivedState, after: &PerceivedState) -> bool {
        match self {
            Effect::Object(kind) => after.appeared_since(before).any(|o| &o.kind == kind),
            Effect::Success => after.feedback == Feedback::Success,
            Effect::Failure => after.feedback == Feedback::Failure,
        }
    }
}

impl fmt::Display for Effect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Effect::Object(kind) => kind.fmt(f),
            Effect::Success => f.write_str("SUCCESS"),
            Effect::Failure => f.write_str("FAILURE"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Hypothesis {
    pub cause: EventTemplate,
    pub effect: Effect,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.cause, self.effect)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Theory {
    hypotheses: BTreeSet<Hypothesis>,
    seen: BTreeSet<EventTemplate>,
}

impl Theory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hypotheses(&self) -> impl Iterator<Item = &Hypothesis> {
        self.hypotheses.iter()
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn contains(&self, h: &Hypothesis) -> bool {
        self.hypotheses.contains(h)
    }

    pub fn seen_templates(&self) -> &BTreeSet<EventTemplate> {
        &self.seen
    }

    /// Make the theory consistent with one observed transition.
    pub fn update(&mut self, before: &PerceivedState, after: &PerceivedState, events: &[Event]) {
        let observed: BTreeSet<EventTemplate> = events.iter().map(template_of).collect();

        for template in &observed {
            if !self.seen.insert(template.clone()) {
                continue;
            }
            for object in after.appeared_since(before) {
                self.hypotheses.insert(Hypothesis {
                    cause: template.clone(),
                    effect: Effect::Object(object.kind.clone()),
                });
            }
            if after.feedback == Feedback::Success {
                self.hypotheses.insert(Hypothesis {
                    cause: template.clone(),
                    effect: Effect::Success,
                });
            }
            if after.feedback == Feedback::Failure {
                self.hypotheses.insert(Hypothesis {
                    cause: template.clone(),
                    effect: Effect::Failure,
                });
            }
        }

        self.hypotheses
            .retain(|h| !observed.contains(&h.cause) || h.effect.occurred(before, after));
    }

    /// Cause templates of every hypothesis with this effect.
    pub fn causes(&self, effect: &Effect) -> BTreeSet<EventTemplate> {
        self.hypotheses
            .iter()
            .filter(|h| &h.effect == effect)
            .map(|h| h.cause.clone())
            .collect()
    }

    /// Templates instantiable in `state` that lie on some causal chain ending
    /// in `effect`. Each effect is expanded at most once per query, which is
    /// what terminates the search on cyclic theories.
    pub fn contributors(&self, state: &PerceivedState, effect: &Effect) -> BTreeSet<EventTemplate> {
        let mut visited = BTreeSet::new();
        let mut out = BTreeSet::new();
        self.collect_contributors(state, effect, &mut visited, &mut out);
        out
    }

    fn collect_contributors(
        &self,
        state: &PerceivedState,
        effect: &Effect,
        visited: &mut BTreeSet<Effect>,
        out: &mut BTreeSet<EventTemplate>,
    ) {
        if !visited.insert(effect.clone()) {
            return;
        }
        for cause in self.causes(effect) {
            if cause.instantiable_in(state) {
                out.insert(cause);
            } else {
                let missing: Vec<ObjectType> = cause.missing_types(state).cloned().collect();
                for kind in missing {
                    self.collect_contributors(state, &Effect::Object(kind), visited, out);
                }
            }
        }
    }

    /// One hypothesis per line, e.g. `picks(Taxi, Passenger) -> Stop`.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for h in &self.hypotheses {
            out.push_str(&h.to_string());
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::fixtures::{obj, state};
    use crate::perception::{Event, PerceivedState};

    fn hyp(cause: EventTemplate, effect: Effect) -> Hypothesis {
        Hypothesis { cause, effect }
    }

    fn picks() -> EventTemplate {
        EventTemplate::new("picks", "Taxi", Some("Passenger"))
    }
    fn drops_stop() -> EventTemplate {
        EventTemplate::new("drops", "Taxi+Passenger", Some("Stop"))
    }
    fn drops_dest() -> EventTemplate {
        EventTemplate::new("drops", "Taxi+Passenger", Some("Destination"))
    }

    fn taxi_theory() -> Theory {
        let mut t = Theory::new();
        for (c, e) in [
            (picks(), Effect::object("Taxi+Passenger")),
            (picks(), Effect::object("Stop")),
            (drops_stop(), Effect::object("Taxi")),
            (drops_stop(), Effect::object("Passenger")),
            (drops_dest(), Effect::Success),
            (drops_dest(), Effect::object("Stop")),
        ] {
            t.seen.insert(c.clone());
            t.hypotheses.insert(hyp(c, e));
        }
        t
    }

    #[test]
    fn first_pickup_generates_hypotheses() {
        let taxi = obj(1, "Taxi", 0, 0, 0);
        let passenger = obj(2, "Passenger", 0, 0, 0);
        let dest = obj(3, "Destination", 4, 0, 2);
        let s = state(vec![taxi.clone(), passenger.clone(), dest.clone()]);
        let s2 = state(vec![obj(4, "Taxi+Passenger", 0, 0, 0), obj(5, "Stop", 0, 0, 0), dest]);
        let mut t = Theory::new();
        t.update(&s, &s2, &[Event::new("picks", &taxi, Some(&passenger))]);
        assert_eq!(
            t.dump(),
            "picks(Taxi, Passenger) -> Stop\npicks(Taxi, Passenger) -> Taxi+Passenger\n"
        );
        assert!(t.seen_templates().contains(&picks()));
    }

    #[test]
    fn no_events_leaves_theory_unchanged() {
        let mut t = taxi_theory();
        let before = t.clone();
        let s = state(vec![obj(1, "Taxi", 0, 0, 0)]);
        let s2 = state(vec![obj(1, "Taxi", 1, 0, 0), obj(9, "Stop", 3, 3, 1)]);
        t.update(&s, &s2, &[]);
        assert_eq!(t, before);
    }

    #[test]
    fn unconfirmed_effect_is_falsified() {
        let mut t = taxi_theory();
        let tp = obj(4, "Taxi+Passenger", 4, 0, 2);
        let dest = obj(3, "Destination", 4, 0, 2);
        let s = state(vec![tp.clone(), dest.clone()]);
        // Drop observed, Stop appears, but no SUCCESS feedback.
        let s2 = state(vec![tp.clone(), obj(7, "Stop", 4, 0, 2)]);
        t.update(&s, &s2, &[Event::new("drops", &tp, Some(&dest))]);
        assert!(!t.contains(&hyp(drops_dest(), Effect::Success)));
        assert!(t.contains(&hyp(drops_dest(), Effect::object("Stop"))));
        assert_eq!(t.len(), 5);
    }

    #[test]
    fn seen_templates_do_not_regenerate() {
        let mut t = Theory::new();
        let a = obj(1, "A", 0, 0, 0);
        let b = obj(2, "B", 0, 0, 0);
        let s = state(vec![a.clone(), b.clone()]);
        let s2 = state(vec![a.clone(), b.clone(), obj(3, "C", 0, 0, 0)]);
        let ev = [Event::new("meets", &a, Some(&b))];
        t.update(&s, &s2, &ev);
        assert_eq!(t.len(), 1);
        // Observed without the effect: falsified for good.
        t.update(&s, &s, &ev);
        assert!(t.is_empty());
        t.update(&s, &s2, &ev);
        assert!(t.is_empty());
    }

    #[test]
    fn causes_by_effect() {
        let t = taxi_theory();
        assert_eq!(t.causes(&Effect::Success), BTreeSet::from([drops_dest()]));
        assert!(Theory::new().causes(&Effect::Success).is_empty());
        assert!(t.causes(&Effect::Failure).is_empty());
    }

    #[test]
    fn contributors_chain_back_to_pickup() {
        let t = taxi_theory();
        let initial = state(vec![
            obj(1, "Taxi", 2, 2, 1),
            obj(2, "Passenger", 0, 0, 0),
            obj(3, "Destination", 4, 0, 2),
            obj(5, "Stop", 0, 4, 1),
            obj(6, "Stop", 4, 3, 4),
        ]);
        assert_eq!(t.contributors(&initial, &Effect::Success), BTreeSet::from([picks()]));

        let carrying = state(vec![
            obj(7, "Taxi+Passenger", 0, 0, 0),
            obj(3, "Destination", 4, 0, 2),
            obj(8, "Stop", 0, 0, 0),
            obj(5, "Stop", 0, 4, 1),
            obj(6, "Stop", 4, 3, 4),
        ]);
        assert_eq!(t.contributors(&carrying, &Effect::Success), BTreeSet::from([drops_dest()]));
    }

    #[test]
    fn contributors_courier_chain() {
        let mut t = Theory::new();
        let arrive = |k: u8| {
            let actor = if k == 0 { "Courier".to_string() } else { format!("Courier+{k}") };
            EventTemplate::new("arrives", &actor, Some("Package"))
        };
        for k in 0..4u8 {
            t.hypotheses.insert(hyp(arrive(k), Effect::object(&format!("Courier+{}", k + 1))));
        }
        let deliver = EventTemplate::new("arrives", "Courier+4", Some("Platform"));
        t.hypotheses.insert(hyp(deliver.clone(), Effect::Success));
        t.hypotheses.insert(hyp(deliver.clone(), Effect::object("Platform+4")));
        t.hypotheses.insert(hyp(deliver, Effect::object("Courier")));

        let s = state(vec![
            obj(1, "Courier", 0, 0, 0),
            obj(2, "Package", 5, 5, 0),
            obj(3, "Package", 9, 9, 1),
            obj(4, "Platform", 17, 17, 1),
        ]);
        assert_eq!(t.contributors(&s, &Effect::Success), BTreeSet::from([arrive(0)]));
    }

    #[test]
    fn contributors_terminate_on_cycles() {
        let mut t = Theory::new();
        let ab = EventTemplate::new("e", "A", Some("B"));
        let ba = EventTemplate::new("e", "B", Some("A"));
        t.hypotheses.insert(hyp(ab.clone(), Effect::object("B")));
        t.hypotheses.insert(hyp(ba.clone(), Effect::object("A")));
        t.hypotheses.insert(hyp(ab, Effect::Success));
        let s: PerceivedState = state(vec![obj(1, "C", 0, 0, 0)]);
        assert!(t.contributors(&s, &Effect::Success).is_empty());
    }
}
