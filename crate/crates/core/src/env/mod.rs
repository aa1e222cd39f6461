//! Environment contract and the two grid-world task kernels.

mod courier;
mod grid;
mod taxi;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use courier::{CourierConfig, CourierEnv};
pub use grid::{Direction, Grid, Side, WallSegment};
pub use taxi::{PassengerLocation, TaxiAction, TaxiEnv, TAXI_MAX_STEPS, TAXI_STOPS};

use crate::perception::{Event, Feedback, ObjectView, PerceivedState, RegionId, Vec2};

/// Index into an environment's action list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub u8);

impl ActionId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Both environments list the four moves first, in `Direction::ALL` order.
impl From<Direction> for ActionId {
    fn from(d: Direction) -> Self {
        ActionId(Direction::ALL.iter().position(|&x| x == d).expect("listed") as u8)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("step called on a terminal state")]
    Terminal,
    #[error("action {0} is not in this environment's action set")]
    IllegalAction(ActionId),
    #[error("unknown environment `{0}`")]
    UnknownEnvironment(String),
}

/// Result of one environment step.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: PerceivedState,
    pub events: Vec<Event>,
    /// Raw task reward; only the reward-based baselines read it.
    pub reward: f64,
}

pub trait Environment {
    fn kind(&self) -> EnvKind;

    fn action_names(&self) -> &'static [&'static str];

    fn actions(&self) -> Vec<ActionId> {
        (0..self.action_names().len() as u8).map(ActionId).collect()
    }

    fn reset(&mut self, seed: u64) -> PerceivedState;

    /// Fails on terminal states and on actions outside the action set.
    fn step(&mut self, action: ActionId) -> Result<Transition, EnvError>;

    fn perceive(&self) -> PerceivedState;

    fn grid(&self) -> &Grid;

    fn region_of(&self, cell: Vec2) -> RegionId {
        self.grid().region_of(cell)
    }

    fn render(&self) -> RenderDescriptor {
        RenderDescriptor::new(self.kind(), self.grid(), &self.perceive())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnvKind {
    Taxi,
    Courier,
}

impl EnvKind {
    pub const ALL: [EnvKind; 2] = [EnvKind::Taxi, EnvKind::Courier];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::Taxi => "taxi",
            EnvKind::Courier => "courier",
        }
    }

    /// `(rows, cols)` of the default layout.
    pub fn dims(self) -> (i32, i32) {
        match self {
            EnvKind::Taxi => (5, 5),
            EnvKind::Courier => {
                let c = CourierConfig::default();
                (c.size, c.size)
            }
        }
    }

    /// The environment's event detector, applied to perceived states only.
    pub fn events(self, before: &PerceivedState, after: &PerceivedState) -> Vec<Event> {
        match self {
            EnvKind::Taxi => taxi::detect_events(before, after),
            EnvKind::Courier => courier::detect_events(before, after),
        }
    }

    pub fn make(self) -> AnyEnv {
        match self {
            EnvKind::Taxi => AnyEnv::Taxi(TaxiEnv::new()),
            EnvKind::Courier => AnyEnv::Courier(CourierEnv::new(CourierConfig::default())),
        }
    }

    pub fn grid(self) -> Grid {
        match self {
            EnvKind::Taxi => taxi::taxi_grid(),
            EnvKind::Courier => CourierConfig::default().grid(),
        }
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = EnvError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "taxi" => Ok(EnvKind::Taxi),
            "courier" => Ok(EnvKind::Courier),
            other => Err(EnvError::UnknownEnvironment(other.to_string())),
        }
    }
}

/// Runtime-selected environment.
#[derive(Debug, Clone)]
pub enum AnyEnv {
    Taxi(TaxiEnv),
    Courier(CourierEnv),
}

macro_rules! dispatch {
    ($self:ident, $env:ident => $body:expr) => {
        match $self {
            AnyEnv::Taxi($env) => $body,
            AnyEnv::Courier($env) => $body,
        }
    };
}

impl Environment for AnyEnv {
    fn kind(&self) -> EnvKind {
        dispatch!(self, e => e.kind())
    }
    fn action_names(&self) -> &'static [&'static str] {
        dispatch!(self, e => e.action_names())
    }
    fn reset(&mut self, seed: u64) -> PerceivedState {
        dispatch!(self, e => e.reset(seed))
    }
    fn step(&mut self, action: ActionId) -> Result<Transition, EnvError> {
        dispatch!(self, e => e.step(action))
    }
    fn perceive(&self) -> PerceivedState {
        dispatch!(self, e => e.perceive())
    }
    fn grid(&self) -> &Grid {
        dispatch!(self, e => e.grid())
    }
}

/// Everything a client needs to draw a state without environment logic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderDescriptor {
    pub env: EnvKind,
    pub rows: i32,
    pub cols: i32,
    pub walls: Vec<WallSegment>,
    /// Region id per cell, row-major.
    pub regions: Vec<Vec<u16>>,
    pub objects: Vec<ObjectView>,
    pub feedback: Feedback,
    pub terminal: bool,
}

impl RenderDescriptor {
    pub fn new(env: EnvKind, grid: &Grid, state: &PerceivedState) -> Self {
        RenderDescriptor {
            env,
            rows: grid.rows(),
            cols: grid.cols(),
            walls: grid.walls().to_vec(),
            regions: (0..grid.rows())
                .map(|r| (0..grid.cols()).map(|c| grid.region_of(Vec2::new(r, c)).0).collect())
                .collect(),
            objects: state.objects().to_vec(),
            feedback: state.feedback,
            terminal: state.terminal,
        }
    }
}
