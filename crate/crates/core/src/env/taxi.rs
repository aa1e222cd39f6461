//! The 5x5 Taxi task with an object-level perception layer.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Direction, Grid, Side, WallSegment};
use super::{ActionId, EnvError, EnvKind, Environment, Transition};
use crate::perception::{Event, Feedback, ObjectId, ObjectType, ObjectView, PerceivedState, RegionId, Vec2};

pub const TAXI_MAX_STEPS: u32 = 200;

/// Stop cells R, G, Y, B in the traditional numbering.
pub const TAXI_STOPS: [Vec2; 4] = [Vec2::new(0, 0), Vec2::new(0, 4), Vec2::new(4, 0), Vec2::new(4, 3)];

const ACTION_NAMES: [&str; 6] = ["north", "south", "east", "west", "pickup", "dropoff"];

const TAXI: &str = "Taxi";
const CARRYING: &str = "Taxi+Passenger";
const PASSENGER: &str = "Passenger";
const DESTINATION: &str = "Destination";
const STOP: &str = "Stop";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaxiAction {
    North,
    South,
    East,
    West,
    Pickup,
    Dropoff,
}

impl TaxiAction {
    pub const ALL: [TaxiAction; 6] = [
        TaxiAction::North,
        TaxiAction::South,
        TaxiAction::East,
        TaxiAction::West,
        TaxiAction::Pickup,
        TaxiAction::Dropoff,
    ];

    pub fn id(self) -> ActionId {
        ActionId(self as u8)
    }

    pub fn from_id(id: ActionId) -> Option<Self> {
        Self::ALL.get(id.index()).copied()
    }

    pub fn name(self) -> &'static str {
        ACTION_NAMES[self as usize]
    }

    pub fn from_name(name: &str) -> Option<Self> {
        ACTION_NAMES.iter().position(|n| *n == name).map(|i| Self::ALL[i])
    }

    fn direction(self) -> Option<Direction> {
        match self {
            TaxiAction::North => Some(Direction::North),
            TaxiAction::South => Some(Direction::South),
            TaxiAction::East => Some(Direction::East),
            TaxiAction::West => Some(Direction::West),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PassengerLocation {
    At(u8),
    InTaxi,
    Delivered,
}

/// Classic wall layout; regions are five wall-bounded rectangles: rows 0-2
/// split at the column 1|2 wall, and rows 3-4 split into columns 0, 1-2, 3-4.
pub fn taxi_grid() -> Grid {
    let east = |row, col| WallSegment {
        row,
        col,
        side: Side::East,
    };
    let walls = vec![east(0, 1), east(1, 1), east(3, 0), east(4, 0), east(3, 2), east(4, 2)];
    Grid::new(5, 5, walls, |c| {
        RegionId(match (c.row <= 2, c.col) {
            (true, 0..=1) => 0,
            (true, _) => 1,
            (false, 0) => 2,
            (false, 1..=2) => 3,
            (false, _) => 4,
        })
    })
}

#[derive(Debug, Clone)]
pub struct TaxiEnv {
    grid: Grid,
    taxi: Vec2,
    passenger: PassengerLocation,
    destination: u8,
    taxi_id: ObjectId,
    passenger_id: Option<ObjectId>,
    destination_id: Option<ObjectId>,
    stop_ids: [Option<ObjectId>; 4],
    next_id: u32,
    steps: u32,
    feedback: Feedback,
    done: bool,
}

impl Default for TaxiEnv {
    fn default() -> Self {
        Self::new()
    }
}

impl TaxiEnv {
    pub fn new() -> Self {
        let mut env = TaxiEnv {
            grid: taxi_grid(),
            taxi: Vec2::ZERO,
            passenger: PassengerLocation::At(0),
            destination: 1,
            taxi_id: ObjectId(0),
            passenger_id: None,
            destination_id: None,
            stop_ids: [None; 4],
            next_id: 0,
            steps: 0,
            feedback: Feedback::None,
            done: false,
        };
        env.place(Vec2::new(2, 2), 0, 1);
        env
    }

    /// A fresh episode in the given configuration; `passenger` is a stop
    /// index, `destination` must differ from it.
    pub fn with_configuration(taxi: Vec2, passenger: PassengerLocation, destination: u8) -> Self {
        let mut env = Self::new();
        match passenger {
            PassengerLocation::At(p) => env.place(taxi, p, destination),
            PassengerLocation::InTaxi => {
                let spare = (0..4).find(|&p| p != destination).expect("four stops");
                env.place(taxi, spare, destination);
                env.passenger = PassengerLocation::InTaxi;
                env.passenger_id = None;
                env.taxi_id = env.fresh_id();
                env.stop_ids[spare as usize] = Some(env.fresh_id());
            }
            PassengerLocation::Delivered => panic!("delivered is terminal"),
        }
        env
    }

    fn fresh_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next_id);
        self.next_id += 1;
        id
    }

    fn place(&mut self, taxi: Vec2, passenger: u8, destination: u8) {
        assert_ne!(passenger, destination, "passenger and destination share a stop");
        self.next_id = 0;
        self.taxi = taxi;
        self.passenger = PassengerLocation::At(passenger);
        self.destination = destination;
        self.taxi_id = self.fresh_id();
        self.passenger_id = Some(self.fresh_id());
        self.destination_id = Some(self.fresh_id());
        for k in 0..4u8 {
            self.stop_ids[k as usize] = if k == passenger || k == destination {
                None
            } else {
                Some(self.fresh_id())
            };
        }
        self.steps = 0;
        self.feedback = Feedback::None;
        self.done = false;
    }

    pub fn taxi(&self) -> Vec2 {
        self.taxi
    }

    pub fn passenger(&self) -> PassengerLocation {
        self.passenger
    }

    pub fn destination(&self) -> u8 {
        self.destination
    }

    pub fn steps(&self) -> u32 {
        self.steps
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn is_success(&self) -> bool {
        self.feedback == Feedback::Success
    }

    fn stop_at(&self, cell: Vec2) -> Option<u8> {
        TAXI_STOPS.iter().position(|&s| s == cell).map(|i| i as u8)
    }

    fn view(&self, id: ObjectId, kind: &str, location: Vec2) -> ObjectView {
        ObjectView {
            id,
            kind: ObjectType::new(kind),
            location,
            velocity: Vec2::ZERO,
            region: self.grid.region_of(location),
        }
    }

    fn apply(&mut self, action: TaxiAction) -> f64 {
        if let Some(dir) = action.direction() {
            self.taxi = self.grid.move_from(self.taxi, dir);
            return -1.0;
        }
        let here = self.stop_at(self.taxi);
        match (action, self.passenger, here) {
            (TaxiAction::Pickup, PassengerLocation::At(p), Some(k)) if p == k => {
                self.passenger = PassengerLocation::InTaxi;
                self.passenger_id = None;
                self.taxi_id = self.fresh_id();
                self.stop_ids[k as usize] = Some(self.fresh_id());
                -1.0
            }
            (TaxiAction::Dropoff, PassengerLocation::InTaxi, Some(k)) if k == self.destination => {
                self.passenger = PassengerLocation::Delivered;
                self.destination_id = None;
                self.stop_ids[k as usize] = Some(self.fresh_id());
                self.feedback = Feedback::Success;
                self.done = true;
                20.0
            }
            (TaxiAction::Dropoff, PassengerLocation::InTaxi, Some(k)) => {
                self.passenger = PassengerLocation::At(k);
                self.stop_ids[k as usize] = None;
                self.taxi_id = self.fresh_id();
                self.passenger_id = Some(self.fresh_id());
                -1.0
            }
            _ => -1.0,
        }
    }
}

impl Environment for TaxiEnv {
    fn kind(&self) -> EnvKind {
        EnvKind::Taxi
    }

    fn action_names(&self) -> &'static [&'static str] {
        &ACTION_NAMES
    }

    fn reset(&mut self, seed: u64) -> PerceivedState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let taxi = Vec2::new(rng.gen_range(0..5), rng.gen_range(0..5));
        let passenger = rng.gen_range(0..4u8);
        let mut destination = rng.gen_range(0..3u8);
        if destination >= passenger {
            destination += 1;
        }
        self.place(taxi, passenger, destination);
        self.perceive()
    }

    fn step(&mut self, action: ActionId) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::Terminal);
        }
        let action = TaxiAction::from_id(action).ok_or(EnvError::IllegalAction(action))?;
        let before = self.perceive();
        let reward = self.apply(action);
        self.steps += 1;
        if !self.done && self.steps >= TAXI_MAX_STEPS {
            self.done = true;
            self.feedback = Feedback::Failure;
        }
        let state = self.perceive();
        let events = detect_events(&before, &state);
        Ok(Transition { state, events, reward })
    }

    fn perceive(&self) -> PerceivedState {
        let mut objects = Vec::with_capacity(6);
        let taxi_kind = match self.passenger {
            PassengerLocation::At(_) => TAXI,
            PassengerLocation::InTaxi | PassengerLocation::Delivered => CARRYING,
        };
        objects.push(self.view(self.taxi_id, taxi_kind, self.taxi));
        if let (PassengerLocation::At(p), Some(id)) = (self.passenger, self.passenger_id) {
            objects.push(self.view(id, PASSENGER, TAXI_STOPS[p as usize]));
        }
        if let Some(id) = self.destination_id {
            objects.push(self.view(id, DESTINATION, TAXI_STOPS[self.destination as usize]));
        }
        for (k, id) in self.stop_ids.iter().enumerate() {
            if let Some(id) = id {
                objects.push(self.view(*id, STOP, TAXI_STOPS[k]));
            }
        }
        PerceivedState::new(objects, self.feedback, self.done)
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// Infers `picks` and `drops` interactions from two consecutive perceived
/// states. An interaction consumes its co-located subject: the subject's id
/// is gone afterwards.
pub(crate) fn detect_events(before: &PerceivedState, after: &PerceivedState) -> Vec<Event> {
    let mut events = Vec::new();
    for actor in before.objects() {
        let (kind, subjects): (&str, &[&str]) = match actor.kind.as_str() {
            TAXI => ("picks", &[PASSENGER]),
            CARRYING => ("drops", &[STOP, DESTINATION]),
            _ => continue,
        };
        if after.contains(actor.id) {
            // Successful dropoffs keep the carrying taxi.
            if kind != "drops" || after.feedback != Feedback::Success {
                continue;
            }
        }
        for subject in before.objects() {
            if subject.location == actor.location
                && subjects.contains(&subject.kind.as_str())
                && !after.contains(subject.id)
            {
                events.push(Event::new(kind, actor, Some(subject)));
            }
        }
    }
    events
}
