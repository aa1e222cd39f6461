use std::collections::{HashSet, VecDeque};

use crate::env::{Environment, PassengerLocation, TaxiAction, TaxiEnv};
use crate::perception::Vec2;

pub const N_FEATURE_STATES: usize = 500;

/// Taxi row and column, passenger stop (4 = in the taxi) and destination
/// stop. A delivered passenger reads as sitting at the destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeatureState {
    pub taxi_row: u8,
    pub taxi_col: u8,
    pub passenger: u8,
    pub destination: u8,
}

impl FeatureState {
    pub fn new(taxi_row: u8, taxi_col: u8, passenger: u8, destination: u8) -> Option<Self> {
        (taxi_row < 5 && taxi_col < 5 && passenger < 5 && destination < 4).then_some(FeatureState {
            taxi_row,
            taxi_col,
            passenger,
            destination,
        })
    }

    pub fn of(env: &TaxiEnv) -> Self {
        let taxi = env.taxi();
        let destination = env.destination();
        let passenger = match env.passenger() {
            PassengerLocation::At(p) => p,
            PassengerLocation::InTaxi => 4,
            PassengerLocation::Delivered => destination,
        };
        FeatureState {
            taxi_row: taxi.row as u8,
            taxi_col: taxi.col as u8,
            passenger,
            destination,
        }
    }

    pub fn index(self) -> usize {
        ((self.taxi_row as usize * 5 + self.taxi_col as usize) * 5 + self.passenger as usize) * 4 + self.destination as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        if i >= N_FEATURE_STATES {
            return None;
        }
        Self::new((i / 100) as u8, (i / 20 % 5) as u8, (i / 4 % 5) as u8, (i % 4) as u8)
    }

    pub fn taxi(self) -> Vec2 {
        Vec2::new(self.taxi_row as i32, self.taxi_col as i32)
    }

    /// Passenger waiting at its own destination only happens after delivery.
    pub fn is_terminal(self) -> bool {
        self.passenger == self.destination
    }

    /// An episode in exactly this configuration, if it is a live one.
    pub fn to_env(self) -> Option<TaxiEnv> {
        if self.is_terminal() {
            return None;
        }
        let passenger = match self.passenger {
            4 => PassengerLocation::InTaxi,
            p => PassengerLocation::At(p),
        };
        Some(TaxiEnv::with_configuration(self.taxi(), passenger, self.destination))
    }
}

/// Successor feature state and whether the step delivered the passenger.
fn successor(s: FeatureState, a: TaxiAction) -> (FeatureState, bool) {
    let mut env = s.to_env().expect("live state");
    env.step(a.id()).expect("live state accepts every action");
    (FeatureState::of(&env), env.is_success())
}

/// Optimal episode return for every live start: `+20` for the delivery and
/// `-1` for each earlier action. Step counts come from breadth-first search
/// over feature states.
#[derive(Debug, Clone)]
pub struct OptimalReturns {
    steps: Vec<Option<u32>>,
}

impl Default for OptimalReturns {
    fn default() -> Self {
        Self::compute()
    }
}

impl OptimalReturns {
    pub fn compute() -> Self {
        let table: Vec<Option<[(usize, bool); 6]>> = (0..N_FEATURE_STATES)
            .map(|i| {
                let s = FeatureState::from_index(i).expect("in range");
                s.to_env().map(|_| {
                    TaxiAction::ALL.map(|a| {
                        let (next, delivered) = successor(s, a);
                        (next.index(), delivered)
                    })
                })
            })
            .collect();
        let bfs = |start: usize| -> Option<u32> {
            table[start]?;
            let mut dist = vec![None; N_FEATURE_STATES];
            dist[start] = Some(0u32);
            let mut queue = VecDeque::from([start]);
            while let Some(i) = queue.pop_front() {
                let d = dist[i].expect("queued states are labelled");
                for &(j, delivered) in table[i].as_ref().expect("only live states are queued") {
                    if delivered {
                        return Some(d + 1);
                    }
                    if dist[j].is_none() {
                        dist[j] = Some(d + 1);
                        queue.push_back(j);
                    }
                }
            }
            None
        };
        OptimalReturns {
            steps: (0..N_FEATURE_STATES).map(bfs).collect(),
        }
    }

    /// Fewest actions that deliver the passenger; `None` for terminal states.
    pub fn steps(&self, s: FeatureState) -> Option<u32> {
        self.steps[s.index()]
    }

    pub fn optimal_return(&self, s: FeatureState) -> Option<f64> {
        self.steps(s).map(|n| 20.0 - (n as f64 - 1.0))
    }

    /// Feature states reachable from some reset configuration.
    pub fn reachable() -> HashSet<FeatureState> {
        let starts = (0..N_FEATURE_STATES)
            .filter_map(FeatureState::from_index)
            .filter(|s| s.passenger < 4 && !s.is_terminal());
        let mut seen: HashSet<FeatureState> = starts.clone().collect();
        let mut queue: VecDeque<FeatureState> = starts.collect();
        while let Some(s) = queue.pop_front() {
            if s.is_terminal() {
                continue;
            }
            for a in TaxiAction::ALL {
                let (next, _) = successor(s, a);
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }
}
