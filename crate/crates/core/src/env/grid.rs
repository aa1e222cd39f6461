use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::perception::{RegionId, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    South,
    East,
    West,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::North, Direction::South, Direction::East, Direction::West];

    pub fn delta(self) -> Vec2 {
        match self {
            Direction::North => Vec2::new(-1, 0),
            Direction::South => Vec2::new(1, 0),
            Direction::East => Vec2::new(0, 1),
            Direction::West => Vec2::new(0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    East,
    South,
}

/// A wall on the east or south edge of `cell`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WallSegment {
    pub row: i32,
    pub col: i32,
    pub side: Side,
}

/// Rectangular grid with edge walls and a region partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    rows: i32,
    cols: i32,
    walls: Vec<WallSegment>,
    blocked: HashSet<(Vec2, Vec2)>,
    regions: Vec<RegionId>,
}

impl Grid {
    pub fn new(rows: i32, cols: i32, walls: Vec<WallSegment>, region_of: impl Fn(Vec2) -> RegionId) -> Self {
        let mut blocked = HashSet::new();
        for w in &walls {
            let a = Vec2::new(w.row, w.col);
            let b = match w.side {
                Side::East => a + Direction::East.delta(),
                Side::South => a + Direction::South.delta(),
            };
            blocked.insert((a, b));
            blocked.insert((b, a));
        }
        let mut regions = Vec::with_capacity((rows * cols) as usize);
        for r in 0..rows {
            for c in 0..cols {
                regions.push(region_of(Vec2::new(r, c)));
            }
        }
        Grid {
            rows,
            cols,
            walls,
            blocked,
            regions,
        }
    }

    pub fn rows(&self) -> i32 {
        self.rows
    }

    pub fn cols(&self) -> i32 {
        self.cols
    }

    pub fn walls(&self) -> &[WallSegment] {
        &self.walls
    }

    pub fn contains(&self, cell: Vec2) -> bool {
        (0..self.rows).contains(&cell.row) && (0..self.cols).contains(&cell.col)
    }

    pub fn region_of(&self, cell: Vec2) -> RegionId {
        assert!(self.contains(cell), "cell {cell} outside grid");
        self.regions[(cell.row * self.cols + cell.col) as usize]
    }

    pub fn can_move(&self, from: Vec2, dir: Direction) -> bool {
        let to = from + dir.delta();
        self.contains(to) && !self.blocked.contains(&(from, to))
    }

    /// Cell reached by moving one step, or `from` when blocked.
    pub fn move_from(&self, from: Vec2, dir: Direction) -> Vec2 {
        if self.can_move(from, dir) {
            from + dir.delta()
        } else {
            from
        }
    }

    pub fn cells(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.rows).flat_map(move |r| (0..self.cols).map(move |c| Vec2::new(r, c)))
    }

    /// Breadth-first step distances from `target` to every cell.
    pub fn distances_to(&self, target: Vec2) -> Vec<Option<u32>> {
        let idx = |c: Vec2| (c.row * self.cols + c.col) as usize;
        let mut dist = vec![None; (self.rows * self.cols) as usize];
        let mut queue = std::collections::VecDeque::new();
        dist[idx(target)] = Some(0);
        queue.push_back(target);
        while let Some(cell) = queue.pop_front() {
            let d = dist[idx(cell)].expect("queued cells are labelled");
            for dir in Direction::ALL {
                if self.can_move(cell, dir) {
                    let next = cell + dir.delta();
                    if dist[idx(next)].is_none() {
                        dist[idx(next)] = Some(d + 1);
                        queue.push_back(next);
                    }
                }
            }
        }
        dist
    }

    pub fn distance_at(&self, table: &[Option<u32>], cell: Vec2) -> Option<u32> {
        table[(cell.row * self.cols + cell.col) as usize]
    }
}
