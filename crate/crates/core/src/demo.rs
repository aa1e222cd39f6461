//! Demonstration files and the machinery that records them.
//!
//! ```text
//! rfd-demo 1
//! env taxi
//! grid 5 5
//! NONE 0 | 0 Taxi 3 1 0 0 3 | 1 Passenger 0 0 0 0 0 | ...
//! ```
//!
//! Each state line is `<feedback> <terminal> ` followed by one
//! `| id type row col vrow vcol region` group per object, sorted by id.

use std::collections::VecDeque;
use std::fmt::Write as _;

use thiserror::Error;

use crate::agent::{Demonstration, DemonstrationError};
use crate::env::{ActionId, CourierEnv, Direction, EnvError, EnvKind, Environment, TaxiAction, TaxiEnv, TAXI_STOPS};
use crate::perception::{Feedback, ObjectId, ObjectType, ObjectView, PerceivedState, RegionId, Vec2};

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "rfd-demo";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DemoFileError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("line {line}: unsupported format version {found}, expected {FORMAT_VERSION}")]
    Version { line: usize, found: String },
    #[error("demonstration is for {found}, expected {expected}")]
    EnvironmentMismatch { expected: EnvKind, found: EnvKind },
    #[error("line {line}: {message}")]
    Schema { line: usize, message: String },
    #[error(transparent)]
    Demonstration(#[from] DemonstrationError),
}

fn malformed(line: usize, message: impl Into<String>) -> DemoFileError {
    DemoFileError::Malformed {
        line,
        message: message.into(),
    }
}

pub fn format_state(state: &PerceivedState) -> String {
    let mut out = format!("{} {}", state.feedback.tag(), u8::from(state.terminal));
    for o in state.objects() {
        let _ = write!(
            out,
            " | {} {} {} {} {} {} {}",
            o.id.0, o.kind, o.location.row, o.location.col, o.velocity.row, o.velocity.col, o.region.0
        );
    }
    out
}

pub fn write_demo(env: EnvKind, states: &[PerceivedState]) -> String {
    let (rows, cols) = env.dims();
    let mut out = format!("{MAGIC} {FORMAT_VERSION}\nenv {env}\ngrid {rows} {cols}\n");
    for s in states {
        out.push_str(&format_state(s));
        out.push('\n');
    }
    out
}

fn parse_state(text: &str, line: usize) -> Result<PerceivedState, DemoFileError> {
    let mut groups = text.split(" | ");
    let head: Vec<&str> = groups.next().unwrap_or_default().split(' ').collect();
    let [feedback, terminal] = head[..] else {
        return Err(malformed(line, "expected `<feedback> <terminal>` before the first object"));
    };
    let feedback = Feedback::from_tag(feedback).ok_or_else(|| malformed(line, format!("unknown feedback `{feedback}`")))?;
    let terminal = match terminal {
        "0" => false,
        "1" => true,
        other => return Err(malformed(line, format!("terminal flag must be 0 or 1, got `{other}`"))),
    };
    let mut objects = Vec::new();
    for group in groups {
        let fields: Vec<&str> = group.split(' ').collect();
        let [id, kind, row, col, vrow, vcol, region] = fields[..] else {
            return Err(malformed(line, format!("object `{group}` needs 7 fields, has {}", fields.len())));
        };
        let int = |s: &str, what: &str| s.parse::<i32>().map_err(|_| malformed(line, format!("bad {what} `{s}`")));
        objects.push(ObjectView {
            id: ObjectId(id.parse().map_err(|_| malformed(line, format!("bad object id `{id}`")))?),
            kind: ObjectType::new(kind),
            location: Vec2::new(int(row, "row")?, int(col, "column")?),
            velocity: Vec2::new(int(vrow, "velocity")?, int(vcol, "velocity")?),
            region: RegionId(region.parse().map_err(|_| malformed(line, format!("bad region `{region}`")))?),
        });
    }
    let n = objects.len();
    let state = PerceivedState::new(objects, feedback, terminal);
    if state.objects().windows(2).any(|w| w[0].id == w[1].id) || state.objects().len() != n {
        return Err(malformed(line, "duplicate object id"));
    }
    Ok(state)
}

fn type_allowed(env: EnvKind, kind: &str) -> bool {
    let counted = |base: &str| {
        kind == base
            || kind
                .strip_prefix(base)
                .and_then(|rest| rest.strip_prefix('+'))
                .is_some_and(|n| n.parse::<u32>().is_ok_and(|n| n > 0))
    };
    match env {
        EnvKind::Taxi => matches!(kind, "Taxi" | "Taxi+Passenger" | "Passenger" | "Destination" | "Stop"),
        EnvKind::Courier => counted("Courier") || counted("Platform") || matches!(kind, "Package" | "Vehicle"),
    }
}

fn validate_state(env: EnvKind, state: &PerceivedState, line: usize) -> Result<(), DemoFileError> {
    let grid = env.grid();
    for o in state.objects() {
        let schema = |message: String| DemoFileError::Schema { line, message };
        if !type_allowed(env, o.kind.as_str()) {
            return Err(schema(format!("object type `{}` does not exist in {env}", o.kind)));
        }
        if !grid.contains(o.location) {
            return Err(schema(format!("object {} at {} is outside the grid", o.id, o.location)));
        }
        if grid.region_of(o.location) != o.region {
            return Err(schema(format!(
                "object {} at {} claims region {}, the grid says {}",
                o.id,
                o.location,
                o.region,
                grid.region_of(o.location)
            )));
        }
    }
    Ok(())
}

/// Parse and schema-check a demonstration file. With `expected` set, a file
/// for another environment is rejected.
pub fn parse_demo(text: &str, expected: Option<EnvKind>) -> Result<Demonstration, DemoFileError> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let mut header = |name: &str| -> Result<(usize, Vec<String>), DemoFileError> {
        let (n, l) = lines.next().ok_or_else(|| malformed(1, format!("missing `{name}` header")))?;
        let mut parts = l.split(' ');
        if parts.next() != Some(name) {
            return Err(malformed(n, format!("expected `{name}` header")));
        }
        Ok((n, parts.map(str::to_string).collect()))
    };

    let (n, version) = header(MAGIC)?;
    if version != [FORMAT_VERSION.to_string()] {
        return Err(DemoFileError::Version {
            line: n,
            found: version.join(" "),
        });
    }
    let (n, name) = header("env")?;
    let env: EnvKind = match &name[..] {
        [name] => name.parse().map_err(|e: EnvError| malformed(n, e.to_string()))?,
        _ => return Err(malformed(n, "expected `env <name>`")),
    };
    if let Some(expected) = expected {
        if expected != env {
            return Err(DemoFileError::EnvironmentMismatch { expected, found: env });
        }
    }
    let (n, dims) = header("grid")?;
    let (rows, cols) = env.dims();
    if dims != [rows.to_string(), cols.to_string()] {
        return Err(DemoFileError::Schema {
            line: n,
            message: format!("grid {} does not match {env} ({rows} {cols})", dims.join(" ")),
        });
    }

    let mut states = Vec::new();
    for (n, l) in lines {
        if l.is_empty() {
            continue;
        }
        let state = parse_state(l, n)?;
        validate_state(env, &state, n)?;
        states.push(state);
    }
    Ok(Demonstration::new(env, states)?)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RecordError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error("episode ended with {0} instead of SUCCESS")]
    NotSuccessful(Feedback),
    #[error("episode did not finish within {0} actions")]
    Unfinished(usize),
}

/// Reset with `seed`, replay `actions`, and return every perceived state.
pub fn record_episode<E: Environment>(env: &mut E, seed: u64, actions: &[ActionId]) -> Result<Vec<PerceivedState>, EnvError> {
    let mut states = vec![env.reset(seed)];
    for &a in actions {
        states.push(env.step(a)?.state);
    }
    Ok(states)
}

/// Follow `policy` from the seeded start until the episode ends. Anything
/// but SUCCESS is an error.
pub fn record_policy<E: Environment>(
    env: &mut E,
    seed: u64,
    max_steps: usize,
    mut policy: impl FnMut(&E, &PerceivedState) -> ActionId,
) -> Result<(Vec<PerceivedState>, Vec<ActionId>), RecordError> {
    let mut states = vec![env.reset(seed)];
    let mut actions = Vec::new();
    while actions.len() < max_steps {
        let s = states.last().expect("non-empty");
        let a = policy(env, s);
        let t = env.step(a)?;
        actions.push(a);
        let done = t.state.terminal;
        let feedback = t.state.feedback;
        states.push(t.state);
        if done {
            return match feedback {
                Feedback::Success => Ok((states, actions)),
                other => Err(RecordError::NotSuccessful(other)),
            };
        }
    }
    Err(RecordError::Unfinished(max_steps))
}

fn first_step_towards(env: &impl Environment, from: Vec2, to: Vec2) -> Option<Direction> {
    let grid = env.grid();
    let dist = grid.distances_to(to);
    let here = grid.distance_at(&dist, from)?;
    Direction::ALL.into_iter().find(|&d| {
        grid.can_move(from, d) && grid.distance_at(&dist, grid.move_from(from, d)).is_some_and(|n| n < here)
    })
}

/// A person's Taxi tour: drive to the passenger, pick up, detour to a wrong
/// stop and drop there, pick up again, then deliver.
pub fn scripted_taxi_actions(env: &mut TaxiEnv, seed: u64) -> Vec<ActionId> {
    env.reset(seed);
    let passenger = match env.passenger() {
        crate::env::PassengerLocation::At(i) => i,
        _ => unreachable!("passenger waits at a stop after reset"),
    };
    let destination = env.destination();
    let detour = (0..4u8).find(|&i| i != passenger && i != destination).expect("four stops");
    let mut actions = Vec::new();
    let drive = |env: &mut TaxiEnv, target: Vec2, actions: &mut Vec<ActionId>| {
        while let Some(d) = first_step_towards(env, env.taxi(), target) {
            let a = ActionId::from(d);
            env.step(a).expect("scripted moves are legal");
            actions.push(a);
        }
    };
    let act = |env: &mut TaxiEnv, a: TaxiAction, actions: &mut Vec<ActionId>| {
        env.step(a.id()).expect("scripted actions are legal");
        actions.push(a.id());
    };
    drive(env, TAXI_STOPS[passenger as usize], &mut actions);
    act(env, TaxiAction::Pickup, &mut actions);
    drive(env, TAXI_STOPS[detour as usize], &mut actions);
    act(env, TaxiAction::Dropoff, &mut actions);
    act(env, TaxiAction::Pickup, &mut actions);
    drive(env, TAXI_STOPS[destination as usize], &mut actions);
    act(env, TaxiAction::Dropoff, &mut actions);
    actions
}

/// Safe if no collision follows within `depth` steps for some continuation.
fn survives(env: &CourierEnv, a: ActionId, depth: u32) -> bool {
    let mut probe = env.clone();
    match probe.step(a) {
        Err(_) => false,
        Ok(t) if t.state.feedback == Feedback::Failure => false,
        Ok(t) if t.state.terminal || depth == 0 => true,
        Ok(_) => probe.actions().into_iter().any(|b| survives(&probe, b, depth - 1)),
    }
}

/// Step distances to `target` that never pass through `avoid`.
fn distances_avoiding(env: &CourierEnv, target: Vec2, avoid: Option<Vec2>) -> Vec<Option<u32>> {
    let grid = env.grid();
    let cols = grid.cols();
    let idx = |c: Vec2| (c.row * cols + c.col) as usize;
    let mut dist = vec![None; (grid.rows() * cols) as usize];
    let mut queue = VecDeque::from([target]);
    dist[idx(target)] = Some(0u32);
    while let Some(cell) = queue.pop_front() {
        let d = dist[idx(cell)].expect("queued cells are labelled");
        for dir in Direction::ALL {
            let next = grid.move_from(cell, dir);
            if next != cell && Some(next) != avoid && dist[idx(next)].is_none() {
                dist[idx(next)] = Some(d + 1);
                queue.push_back(next);
            }
        }
    }
    dist
}

/// A careful Courier run: visit every package nearest-first along shortest
/// paths that skirt the platform, then deliver everything at once,
/// sidestepping vehicles by looking a few steps ahead.
pub fn scripted_courier_actions(env: &mut CourierEnv, seed: u64, max_steps: usize) -> Result<Vec<ActionId>, RecordError> {
    env.reset(seed);
    let platform = env.config().platform();
    let mut actions = Vec::new();
    let mut recent: VecDeque<Vec2> = VecDeque::new();
    while actions.len() < max_steps {
        let here = env.courier();
        let (target, avoid) = if env.remaining() > 0 {
            let from_here = distances_avoiding(env, here, Some(platform));
            let grid = env.grid();
            let nearest = *env
                .package_cells()
                .iter()
                .min_by_key(|&&c| (grid.distance_at(&from_here, c), c.row, c.col))
                .expect("packages remain");
            (nearest, Some(platform))
        } else {
            (platform, None)
        };
        let dist = distances_avoiding(env, target, avoid);
        let grid = env.grid().clone();
        let score = |a: ActionId| {
            let next = grid.move_from(here, Direction::ALL[a.index()]);
            let d = grid.distance_at(&dist, next).unwrap_or(u32::MAX);
            (d, recent.iter().filter(|&&c| c == next).count())
        };
        let mut options = env.actions();
        options.sort_by_key(|&a| score(a));
        let a = options
            .iter()
            .copied()
            .find(|&a| survives(env, a, 3))
            .or_else(|| options.iter().copied().find(|&a| survives(env, a, 0)))
            .unwrap_or(options[0]);
        let t = env.step(a)?;
        actions.push(a);
        recent.push_back(env.courier());
        if recent.len() > 8 {
            recent.pop_front();
        }
        if t.state.terminal {
            return match t.state.feedback {
                Feedback::Success => Ok(actions),
                other => Err(RecordError::NotSuccessful(other)),
            };
        }
    }
    Err(RecordError::Unfinished(max_steps))
}
