//! The 35x35 Courier task: collect four packages, deliver them to the
//! central platform, and avoid the moving vehicles.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::grid::{Direction, Grid, Side, WallSegment};
use super::{ActionId, EnvError, EnvKind, Environment, Transition};
use crate::perception::{Event, Feedback, ObjectId, ObjectType, ObjectView, PerceivedState, RegionId, Vec2};

const ACTION_NAMES: [&str; 4] = ["north", "south", "east", "west"];
const PACKAGE: &str = "Package";
const VEHICLE: &str = "Vehicle";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CourierConfig {
    pub size: i32,
    /// Each interior wall runs along the east edge of this column.
    pub wall_columns: [i32; 2],
    /// The single open row in each wall.
    pub gap_rows: [i32; 2],
    pub packages: usize,
    pub vehicles: usize,
    /// Vehicles never spawn within this Manhattan distance of the courier.
    pub spawn_clearance: u32,
    /// Expose the courier's last displacement as its velocity.
    pub courier_velocity: bool,
    /// Expose each vehicle's heading as its velocity.
    pub vehicle_velocity: bool,
}

impl Default for CourierConfig {
    fn default() -> Self {
        CourierConfig {
            size: 35,
            wall_columns: [11, 22],
            gap_rows: [17, 17],
            packages: 4,
            vehicles: 20,
            spawn_clearance: 2,
            courier_velocity: false,
            vehicle_velocity: true,
        }
    }
}

impl CourierConfig {
    pub fn platform(&self) -> Vec2 {
        Vec2::new(self.size / 2, self.size / 2)
    }

    pub fn grid(&self) -> Grid {
        let mut walls = Vec::new();
        for (&col, &gap) in self.wall_columns.iter().zip(&self.gap_rows) {
            for row in 0..self.size {
                if row != gap {
                    walls.push(WallSegment {
                        row,
                        col,
                        side: Side::East,
                    });
                }
            }
        }
        let [left, right] = self.wall_columns;
        Grid::new(self.size, self.size, walls, move |c| {
            RegionId(if c.col <= left {
                0
            } else if c.col <= right {
                1
            } else {
                2
            })
        })
    }
}

pub(crate) fn courier_type(carried: usize) -> String {
    if carried == 0 {
        "Courier".to_string()
    } else {
        format!("Courier+{carried}")
    }
}

pub(crate) fn platform_type(delivered: usize) -> String {
    if delivered == 0 {
        "Platform".to_string()
    } else {
        format!("Platform+{delivered}")
    }
}

fn is_courier(kind: &ObjectType) -> bool {
    kind.as_str() == "Courier" || kind.as_str().starts_with("Courier+")
}

fn is_platform(kind: &ObjectType) -> bool {
    kind.as_str() == "Platform" || kind.as_str().starts_with("Platform+")
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Vehicle {
    id: ObjectId,
    location: Vec2,
    heading: Direction,
}

#[derive(Debug, Clone)]
pub struct CourierEnv {
    config: CourierConfig,
    grid: Grid,
    courier: Vec2,
    courier_velocity: Vec2,
    courier_id: ObjectId,
    carried: usize,
    packages: Vec<(ObjectId, Vec2)>,
    platform_id: ObjectId,
    delivered: usize,
    vehicles: Vec<Vehicle>,
    next_id: u32,
    steps: u64,
    feedback: Feedback,
    done: bool,
}

impl CourierEnv {
    pub fn new(config: CourierConfig) -> Self {
        let grid = config.grid();
        let mut env = CourierEnv {
            grid,
            courier: Vec2::ZERO,
            courier_velocity: Vec2::ZERO,
            courier_id: ObjectId(0),
            carried: 0,
            packages: Vec::new(),
            platform_id: ObjectId(0),
            delivered: 0,
            vehicles: Vec::new(),
            next_id: 0,
            steps: 0,
            feedback: Feedback::None,
            done: false,
            config,
        };
        env.reset(0);
        env
    }

    pub fn config(&self) -> &CourierConfig {
        &self.config
    }

    pub fn carried(&self) -> usize {
        self.carried
    }

    pub fn delivered(&self) -> usize {
        self.delivered
    }

    pub fn remaining(&self) -> usize {
        self.packages.len()
    }

    pub fn courier(&self) -> Vec2 {
        self.courier
    }

    pub fn package_cells(&self) -> Vec<Vec2> {
        self.packages.iter().map(|p| p.1).collect()
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    fn fresh_id(&mut self) -> ObjectId {
        let id = ObjectId(self.next_id);
        self.next_id += 1;
        id
    }

    fn view(&self, id: ObjectId, kind: String, location: Vec2, velocity: Vec2) -> ObjectView {
        ObjectView {
            id,
            kind: ObjectType(kind),
            location,
            velocity,
            region: self.grid.region_of(location),
        }
    }

    fn advance_vehicle(grid: &Grid, v: &mut Vehicle) {
        if !grid.can_move(v.location, v.heading) {
            v.heading = match v.heading {
                Direction::North => Direction::South,
                Direction::South => Direction::North,
                Direction::East => Direction::West,
                Direction::West => Direction::East,
            };
        }
        v.location = grid.move_from(v.location, v.heading);
    }
}

impl Environment for CourierEnv {
    fn kind(&self) -> EnvKind {
        EnvKind::Courier
    }

    fn action_names(&self) -> &'static [&'static str] {
        &ACTION_NAMES
    }

    fn reset(&mut self, seed: u64) -> PerceivedState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = self.config.size;
        let platform = self.config.platform();
        let mut taken: HashSet<Vec2> = HashSet::from([platform]);
        let random_cell = |rng: &mut ChaCha8Rng, taken: &mut HashSet<Vec2>, ok: &dyn Fn(Vec2) -> bool| loop {
            let c = Vec2::new(rng.gen_range(0..size), rng.gen_range(0..size));
            if !taken.contains(&c) && ok(c) {
                taken.insert(c);
                return c;
            }
        };

        self.next_id = 0;
        self.courier = random_cell(&mut rng, &mut taken, &|_| true);
        self.courier_velocity = Vec2::ZERO;
        self.courier_id = self.fresh_id();
        self.carried = 0;
        self.delivered = 0;
        self.platform_id = self.fresh_id();
        self.packages.clear();
        for _ in 0..self.config.packages {
            let cell = random_cell(&mut rng, &mut taken, &|_| true);
            let id = self.fresh_id();
            self.packages.push((id, cell));
        }
        self.vehicles.clear();
        let courier = self.courier;
        let clearance = self.config.spawn_clearance;
        for _ in 0..self.config.vehicles {
            let cell = random_cell(&mut rng, &mut taken, &|c: Vec2| c.manhattan(courier) > clearance);
            let heading = Direction::ALL[rng.gen_range(0..4)];
            let id = self.fresh_id();
            self.vehicles.push(Vehicle {
                id,
                location: cell,
                heading,
            });
        }
        self.steps = 0;
        self.feedback = Feedback::None;
        self.done = false;
        self.perceive()
    }

    fn step(&mut self, action: ActionId) -> Result<Transition, EnvError> {
        if self.done {
            return Err(EnvError::Terminal);
        }
        let dir = *Direction::ALL
            .get(action.index())
            .ok_or(EnvError::IllegalAction(action))?;
        let before = self.perceive();

        let start = self.courier;
        self.courier = self.grid.move_from(start, dir);
        self.courier_velocity = self.courier - start;

        // Stepping onto a vehicle ends the task before anything is collected,
        // and the last delivery ends it before the vehicles move again.
        let mut collided = self.vehicles.iter().any(|v| v.location == self.courier);
        if !collided {
            if let Some(i) = self.packages.iter().position(|p| p.1 == self.courier) {
                self.packages.remove(i);
                self.carried += 1;
                self.courier_id = self.fresh_id();
            } else if self.courier == self.config.platform() && self.carried > 0 {
                self.delivered += self.carried;
                self.carried = 0;
                self.courier_id = self.fresh_id();
                self.platform_id = self.fresh_id();
            }
            if self.delivered < self.config.packages {
                for v in &mut self.vehicles {
                    Self::advance_vehicle(&self.grid, v);
                }
                collided = self.vehicles.iter().any(|v| v.location == self.courier);
            }
        }

        self.steps += 1;
        let reward = if collided {
            self.feedback = Feedback::Failure;
            self.done = true;
            -1.0
        } else if self.delivered == self.config.packages {
            self.feedback = Feedback::Success;
            self.done = true;
            1.0
        } else {
            0.0
        };

        let state = self.perceive();
        let events = detect_events(&before, &state);
        Ok(Transition { state, events, reward })
    }

    fn perceive(&self) -> PerceivedState {
        let mut objects = Vec::with_capacity(2 + self.packages.len() + self.vehicles.len());
        let velocity = if self.config.courier_velocity {
            self.courier_velocity
        } else {
            Vec2::ZERO
        };
        objects.push(self.view(self.courier_id, courier_type(self.carried), self.courier, velocity));
        objects.push(self.view(
            self.platform_id,
            platform_type(self.delivered),
            self.config.platform(),
            Vec2::ZERO,
        ));
        for &(id, cell) in &self.packages {
            objects.push(self.view(id, PACKAGE.to_string(), cell, Vec2::ZERO));
        }
        for v in &self.vehicles {
            let velocity = if self.config.vehicle_velocity {
                v.heading.delta()
            } else {
                Vec2::ZERO
            };
            objects.push(self.view(v.id, VEHICLE.to_string(), v.location, velocity));
        }
        PerceivedState::new(objects, self.feedback, self.done)
    }

    fn grid(&self) -> &Grid {
        &self.grid
    }
}

/// `arrives` when the courier consumes a package or the platform record,
/// `collides` when the courier ends up on a vehicle's cell before or after
/// the vehicles move.
pub(crate) fn detect_events(before: &PerceivedState, after: &PerceivedState) -> Vec<Event> {
    let mut events = Vec::new();
    let Some(courier) = before.objects().iter().find(|o| is_courier(&o.kind)) else {
        return events;
    };
    let Some(moved) = after.objects().iter().find(|o| is_courier(&o.kind)) else {
        return events;
    };
    for object in before.objects() {
        let consumed = !after.contains(object.id);
        if consumed && (object.kind.as_str() == PACKAGE || is_platform(&object.kind)) {
            events.push(Event::new("arrives", courier, Some(object)));
        }
    }
    for vehicle in before.objects().iter().filter(|o| o.kind.as_str() == VEHICLE) {
        let later = after.object(vehicle.id).map(|v| v.location);
        if vehicle.location == moved.location || later == Some(moved.location) {
            events.push(Event::new("collides", courier, Some(vehicle)));
        }
    }
    events
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perception::template_of;

    fn env() -> CourierEnv {
        CourierEnv::new(CourierConfig::default())
    }

    fn count(s: &PerceivedState, kind: &str) -> usize {
        s.objects().iter().filter(|o| o.kind.as_str() == kind).count()
    }

    /// Replace vehicles and packages with a hand-built layout.
    fn stage(env: &mut CourierEnv, courier: Vec2, packages: &[Vec2], vehicles: &[(Vec2, Direction)]) {
        env.courier = courier;
        env.packages = packages.iter().map(|&c| (ObjectId(1000 + c.row as u32 * 40 + c.col as u32), c)).collect();
        env.vehicles = vehicles
            .iter()
            .enumerate()
            .map(|(i, &(location, heading))| Vehicle {
                id: ObjectId(2000 + i as u32),
                location,
                heading,
            })
            .collect();
    }

    #[test]
    fn reset_layout() {
        let mut e = env();
        for seed in 0..200 {
            let s = e.reset(seed);
            let cells: HashSet<Vec2> = s.objects().iter().map(|o| o.location).collect();
            assert_eq!(cells.len(), 26);
            assert_eq!(count(&s, "Vehicle"), 20);
            assert_eq!(count(&s, "Package"), 4);
            assert_eq!(count(&s, "Courier"), 1);
            assert_eq!(count(&s, "Platform"), 1);
            let platform = e.config.platform();
            assert!(s
                .objects()
                .iter()
                .filter(|o| o.kind.as_str() != "Platform")
                .all(|o| o.location != platform));
            assert_eq!(s, e.reset(seed));
        }
    }

    #[test]
    fn regions_are_three_rectangles() {
        let g = CourierConfig::default().grid();
        let regions: HashSet<RegionId> = g.cells().map(|c| g.region_of(c)).collect();
        assert_eq!(regions.len(), 3);
        assert!(g.can_move(Vec2::new(17, 11), Direction::East));
        assert!(!g.can_move(Vec2::new(16, 11), Direction::East));
        assert!(g.can_move(Vec2::new(17, 22), Direction::East));
        assert!(!g.can_move(Vec2::new(0, 22), Direction::East));
    }

    #[test]
    fn pickup_increments_carry() {
        let mut e = env();
        e.reset(1);
        stage(&mut e, Vec2::new(5, 5), &[Vec2::new(5, 6), Vec2::new(30, 30)], &[]);
        e.carried = 3;
        e.delivered = 0;
        e.config.packages = 5;
        let t = e.step(ActionId(2)).unwrap();
        assert_eq!(count(&t.state, "Courier+4"), 1);
        assert_eq!(template_of(&t.events[0]).to_string(), "arrives(Courier+3, Package)");
        assert_eq!(t.state.feedback, Feedback::None);
    }

    #[test]
    fn partial_delivery_is_not_success() {
        let mut e = env();
        e.reset(1);
        let p = e.config.platform();
        stage(&mut e, p + Vec2::new(0, -1), &[Vec2::new(1, 1), Vec2::new(2, 2)], &[]);
        e.carried = 2;
        let t = e.step(ActionId(2)).unwrap();
        assert_eq!(count(&t.state, "Platform+2"), 1);
        assert_eq!(count(&t.state, "Courier"), 1);
        assert_eq!(t.state.feedback, Feedback::None);
        assert_eq!(template_of(&t.events[0]).to_string(), "arrives(Courier+2, Platform)");
        assert_eq!(e.carried + e.remaining() + e.delivered, 4);
    }

    #[test]
    fn full_delivery_succeeds() {
        let mut e = env();
        e.reset(1);
        let p = e.config.platform();
        stage(&mut e, p + Vec2::new(1, 0), &[], &[]);
        e.carried = 4;
        let t = e.step(ActionId(0)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Success);
        assert!(t.state.terminal);
        assert_eq!(t.reward, 1.0);
        assert_eq!(count(&t.state, "Platform+4"), 1);
    }

    #[test]
    fn stepping_onto_vehicle_fails() {
        let mut e = env();
        e.reset(1);
        stage(
            &mut e,
            Vec2::new(5, 5),
            &[Vec2::new(30, 30)],
            &[(Vec2::new(5, 6), Direction::East)],
        );
        let t = e.step(ActionId(2)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Failure);
        assert!(t.state.terminal);
        assert_eq!(template_of(&t.events[0]).to_string(), "collides(Courier, Vehicle)");
        assert!(e.step(ActionId(0)).is_err());
    }

    #[test]
    fn swap_is_a_collision() {
        let mut e = env();
        e.reset(1);
        stage(
            &mut e,
            Vec2::new(5, 5),
            &[Vec2::new(30, 30)],
            &[(Vec2::new(5, 6), Direction::West)],
        );
        let t = e.step(ActionId(2)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Failure);
        assert_eq!(t.events.len(), 1);
    }

    #[test]
    fn vehicle_on_a_package_blocks_the_pickup() {
        let mut e = env();
        e.reset(1);
        stage(
            &mut e,
            Vec2::new(5, 5),
            &[Vec2::new(5, 6), Vec2::new(30, 30)],
            &[(Vec2::new(5, 6), Direction::South)],
        );
        let t = e.step(ActionId(2)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Failure);
        assert_eq!(e.carried(), 0);
        assert_eq!(t.events.len(), 1);
    }

    #[test]
    fn last_delivery_beats_an_approaching_vehicle() {
        let mut e = env();
        e.reset(1);
        let p = e.config.platform();
        stage(&mut e, p + Vec2::new(1, 0), &[], &[(p + Vec2::new(-1, 0), Direction::South)]);
        e.carried = 4;
        let t = e.step(ActionId(0)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Success);
        assert_eq!(t.events.len(), 1);
    }

    #[test]
    fn vehicle_moving_in_is_a_collision() {
        let mut e = env();
        e.reset(1);
        stage(
            &mut e,
            Vec2::new(5, 5),
            &[Vec2::new(30, 30)],
            &[(Vec2::new(7, 5), Direction::North)],
        );
        let t = e.step(ActionId(1)).unwrap();
        assert_eq!(t.state.feedback, Feedback::Failure);
    }

    #[test]
    fn vehicles_bounce() {
        let mut e = env();
        e.reset(1);
        stage(
            &mut e,
            Vec2::new(30, 30),
            &[Vec2::new(30, 33)],
            &[(Vec2::new(0, 3), Direction::North), (Vec2::new(5, 11), Direction::East)],
        );
        e.step(ActionId(0)).unwrap();
        assert_eq!(e.vehicles[0].location, Vec2::new(1, 3));
        assert_eq!(e.vehicles[0].heading, Direction::South);
        assert_eq!(e.vehicles[1].location, Vec2::new(5, 10));
    }

    #[test]
    fn conservation_over_random_play() {
        let mut e = env();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for seed in 0..20 {
            e.reset(seed);
            while !e.done {
                let before = e.perceive();
                let t = e.step(ActionId(rng.gen_range(0..4))).unwrap();
                assert_eq!(e.carried + e.remaining() + e.delivered, 4);
                assert_eq!(t.events, detect_events(&before, &t.state));
            }
        }
    }
}
