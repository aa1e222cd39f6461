//! Object/event vocabulary shared by every reasoning component.
//!
//! A [`PerceivedState`] is a set of [`ObjectView`]s plus terminal feedback.
//! Transitions between perceived states yield [`Event`]s, and an event's
//! [`EventTemplate`] (event type, actor type, subject type) is the key that
//! both hypotheses and Q-functions are indexed by.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer grid vector; used for both cell locations `(row, col)` and
/// per-step velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub row: i32,
    pub col: i32,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { row: 0, col: 0 };

    pub const fn new(row: i32, col: i32) -> Self {
        Vec2 { row, col }
    }

    pub fn manhattan(self, other: Vec2) -> u32 {
        self.row.abs_diff(other.row) + self.col.abs_diff(other.col)
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.row + rhs.row, self.col + rhs.col)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.row - rhs.row, self.col - rhs.col)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.row, -self.col)
    }
}

impl fmt::Display for Vec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

/// Stable identity of a perceived object within one environment instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjectId(pub u32);

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Region identifier produced by an environment's region partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RegionId(pub u16);

impl fmt::Display for RegionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Short symbolic type shared by similar objects, e.g. `Taxi+Passenger`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectType(pub String);

impl ObjectType {
    pub fn new(name: impl Into<String>) -> Self {
        ObjectType(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ObjectType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Descriptor shared by similar events, e.g. `picks`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventType(pub String);

impl EventType {
    pub fn new(name: impl Into<String>) -> Self {
        EventType(name.into())
    }
}

impl fmt::Display for EventType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectView {
    pub id: ObjectId,
    #[serde(rename = "type")]
    pub kind: ObjectType,
    pub location: Vec2,
    pub velocity: Vec2,
    pub region: RegionId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Feedback {
    #[default]
    None,
    Success,
    Failure,
}

impl Feedback {
    pub fn tag(self) -> &'static str {
        match self {
            Feedback::None => "NONE",
            Feedback::Success => "SUCCESS",
            Feedback::Failure => "FAILURE",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "NONE" => Some(Feedback::None),
            "SUCCESS" => Some(Feedback::Success),
            "FAILURE" => Some(Feedback::Failure),
            _ => None,
        }
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The objects an agent perceives, kept sorted by id, plus feedback.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerceivedState {
    objects: Vec<ObjectView>,
    pub feedback: Feedback,
    pub terminal: bool,
}

impl PerceivedState {
    pub fn new(mut objects: Vec<ObjectView>, feedback: Feedback, terminal: bool) -> Self {
        objects.sort_by_key(|o| o.id);
        PerceivedState {
            objects,
            feedback,
            terminal,
        }
    }

    pub fn objects(&self) -> &[ObjectView] {
        &self.objects
    }

    pub fn object(&self, id: ObjectId) -> Option<&ObjectView> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn contains(&self, id: ObjectId) -> bool {
        self.object(id).is_some()
    }

    pub fn of_type<'a>(&'a self, kind: &'a ObjectType) -> impl Iterator<Item = &'a ObjectView> + 'a {
        self.objects.iter().filter(move |o| &o.kind == kind)
    }

    pub fn has_type(&self, kind: &ObjectType) -> bool {
        self.objects.iter().any(|o| &o.kind == kind)
    }

    /// Objects present here but absent (by id) from `earlier`.
    pub fn appeared_since<'a>(&'a self, earlier: &'a PerceivedState) -> impl Iterator<Item = &'a ObjectView> + 'a {
        self.objects.iter().filter(move |o| !earlier.contains(o.id))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Event {
    #[serde(rename = "type")]
    pub kind: EventType,
    pub actor: ObjectView,
    pub subject: Option<ObjectView>,
}

impl Event {
    pub fn new(kind: &str, actor: &ObjectView, subject: Option<&ObjectView>) -> Self {
        Event {
            kind: EventType::new(kind),
            actor: actor.clone(),
            subject: subject.cloned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EventTemplate {
    pub event_type: EventType,
    pub actor_type: ObjectType,
    pub subject_type: Option<ObjectType>,
}

impl EventTemplate {
    pub fn new(event_type: &str, actor_type: &str, subject_type: Option<&str>) -> Self {
        EventTemplate {
            event_type: EventType::new(event_type),
            actor_type: ObjectType::new(actor_type),
            subject_type: subject_type.map(ObjectType::new),
        }
    }

    /// Whether `state` holds objects of every role type.
    pub fn instantiable_in(&self, state: &PerceivedState) -> bool {
        self.missing_types(state).next().is_none()
    }

    /// Role types with no matching object in `state`.
    pub fn missing_types<'a>(&'a self, state: &'a PerceivedState) -> impl Iterator<Item = &'a ObjectType> + 'a {
        std::iter::once(&self.actor_type)
            .chain(self.subject_type.iter())
            .filter(move |t| !state.has_type(t))
    }
}

impl fmt::Display for EventTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject_type {
            Some(subject) => write!(f, "{}({}, {})", self.event_type, self.actor_type, subject),
            None => write!(f, "{}({})", self.event_type, self.actor_type),
        }
    }
}

/// A template bound to concrete objects of the state it was instantiated in.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PossibleEvent {
    pub template: EventTemplate,
    pub actor: ObjectView,
    pub subject: Option<ObjectView>,
}

impl PossibleEvent {
    /// True when `event` is this interaction between these same objects.
    pub fn matches(&self, event: &Event) -> bool {
        event.actor.id == self.actor.id
            && event.subject.as_ref().map(|o| o.id) == self.subject.as_ref().map(|o| o.id)
            && template_of(event) == self.template
    }

    pub fn occurred_in(&self, events: &[Event]) -> bool {
        events.iter().any(|e| self.matches(e))
    }

    /// Both bound objects still exist in `state`.
    pub fn possible_in(&self, state: &PerceivedState) -> bool {
        state.contains(self.actor.id) && self.subject.as_ref().is_none_or(|o| state.contains(o.id))
    }
}

/// Object-relative abstract state on which a template's Q-function is defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FocusState {
    pub actor_velocity: Vec2,
    pub subject_velocity: Option<Vec2>,
    /// Relative to the subject when there is one, absolute otherwise.
    pub actor_position: Vec2,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerceptionError {
    #[error("possible event refers to object {0} which is not in the state")]
    StalePossibleEvent(ObjectId),
}

pub fn template_of(event: &Event) -> EventTemplate {
    EventTemplate {
        event_type: event.kind.clone(),
        actor_type: event.actor.kind.clone(),
        subject_type: event.subject.as_ref().map(|o| o.kind.clone()),
    }
}

/// Every type-matching binding of each template in `state`.
///
/// Output order follows template order, then object id order, so callers
/// that sample from the result stay deterministic.
pub fn instances<'a, I>(state: &PerceivedState, templates: I) -> Vec<PossibleEvent>
where
    I: IntoIterator<Item = &'a EventTemplate>,
{
    let mut out = Vec::new();
    for template in templates {
        for actor in state.of_type(&template.actor_type) {
            match &template.subject_type {
                None => out.push(PossibleEvent {
                    template: template.clone(),
                    actor: actor.clone(),
                    subject: None,
                }),
                Some(subject_type) => {
                    for subject in state.of_type(subject_type) {
                        if subject.id == actor.id {
                            continue;
                        }
                        out.push(PossibleEvent {
                            template: template.clone(),
                            actor: actor.clone(),
                            subject: Some(subject.clone()),
                        });
                    }
                }
            }
        }
    }
    out
}

/// Set view of [`instances`], convenient for set-algebra checks.
pub fn instance_keys(events: &[PossibleEvent]) -> BTreeSet<(EventTemplate, ObjectId, Option<ObjectId>)> {
    events
        .iter()
        .map(|e| (e.template.clone(), e.actor.id, e.subject.as_ref().map(|o| o.id)))
        .collect()
}

fn lookup<'a>(state: &'a PerceivedState, view: &ObjectView) -> Result<&'a ObjectView, PerceptionError> {
    state
        .object(view.id)
        .ok_or(PerceptionError::StalePossibleEvent(view.id))
}

/// Manhattan distance between the event's objects; 0 without a subject.
pub fn distance(state: &PerceivedState, event: &PossibleEvent) -> Result<u32, PerceptionError> {
    let actor = lookup(state, &event.actor)?;
    match &event.subject {
        None => Ok(0),
        Some(subject) => {
            let subject = lookup(state, subject)?;
            Ok(actor.location.manhattan(subject.location))
        }
    }
}

pub fn focus(state: &PerceivedState, event: &PossibleEvent) -> Result<FocusState, PerceptionError> {
    let actor = lookup(state, &event.actor)?;
    match &event.subject {
        None => Ok(FocusState {
            actor_velocity: actor.velocity,
            subject_velocity: None,
            actor_position: actor.location,
        }),
        Some(subject) => {
            let subject = lookup(state, subject)?;
            Ok(FocusState {
                actor_velocity: actor.velocity,
                subject_velocity: Some(subject.velocity),
                actor_position: actor.location - subject.location,
            })
        }
    }
}
