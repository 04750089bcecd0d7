//! Occupancy-grid shortest paths (A* and Dijkstra) for maze-style assignments.
//!
//! Step costs are 1 for orthogonal moves and sqrt(2) for diagonal moves, in
//! cell units. Path costs are kept as exact `(straight, diagonal)` step counts
//! so both searches agree bit-for-bit on the optimum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use super::ReferenceError;
use crate::world::{segment_segment_distance, Polygon, Vec2, WorldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Connectivity {
    Four,
    Eight,
}

impl TryFrom<u8> for Connectivity {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(format!("connectivity must be 4 or 8, got {other}")),
        }
    }
}

impl From<Connectivity> for u8 {
    fn from(c: Connectivity) -> u8 {
        match c {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    AStar,
    Dijkstra,
}

pub type Cell = (usize, usize);

/// Blocked/free cells over a rectangle; cell `(i, j)` is column `i`, row `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    width: usize,
    height: usize,
    blocked: Vec<bool>,
    origin: Vec2,
    resolution: f64,
}

impl OccupancyGrid {
    /// Unit-resolution grid from a row-major blocked mask.
    pub fn from_cells(width: usize, height: usize, blocked: Vec<bool>) -> Self {
        assert_eq!(blocked.len(), width * height, "mask size must be width * height");
        Self {
            width,
            height,
            blocked,
            origin: Vec2::ZERO,
            resolution: 1.0,
        }
    }

    /// Rasterizes a world. A cell is blocked when its square comes within
    /// `robot_radius` of an obstacle, or when its center is within
    /// `robot_radius` of an arena wall.
    pub fn from_world(world: &WorldSpec, resolution: f64) -> Result<Self, ReferenceError> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(ReferenceError::InvalidResolution(resolution));
        }
        let arena = world.arena;
        let width = (arena.width() / resolution - 1e-9).ceil().max(1.0) as usize;
        let height = (arena.height() / resolution - 1e-9).ceil().max(1.0) as usize;
        let mut grid = Self {
            width,
            height,
            blocked: vec![false; width * height],
            origin: arena.min,
            resolution,
        };
        for j in 0..height {
            for i in 0..width {
                let lo = Vec2::new(arena.min.x + i as f64 * resolution, arena.min.y + j as f64 * resolution);
                let hi = lo + Vec2::new(resolution, resolution);
                let center = grid.center((i, j));
                let near_wall = !arena.contains(center) || arena.wall_distance(center) <= world.robot_radius;
                let near_obstacle = world
                    .obstacles
                    .iter()
                    .any(|p| rect_polygon_distance(lo, hi, p) <= world.robot_radius);
                grid.blocked[j * width + i] = near_wall || near_obstacle;
            }
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn is_blocked(&self, (i, j): Cell) -> bool {
        self.blocked[j * self.width + i]
    }

    pub fn center(&self, (i, j): Cell) -> Vec2 {
        self.origin + Vec2::new((i as f64 + 0.5) * self.resolution, (j as f64 + 0.5) * self.resolution)
    }

    pub fn cell_of(&self, p: Vec2) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || fx >= self.width as f64 || fy >= self.height as f64 {
            return None;
        }
        Some((fx as usize, fy as usize))
    }

    fn index(&self, (i, j): Cell) -> usize {
        j * self.width + i
    }

    fn neighbors(&self, (i, j): Cell, connectivity: Connectivity) -> impl Iterator<Item = (Cell, bool)> + '_ {
        const ORTHO: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const DIAG: [(i64, i64); 4] = [(1, 1), (1, -1), (-1, 1), (-1, -1)];
        let diag: &[(i64, i64)] = match connectivity {
            Connectivity::Four => &[],
            Connectivity::Eight => &DIAG,
        };
        ORTHO
            .iter()
            .map(|d| (*d, false))
            .chain(diag.iter().map(|d| (*d, true)))
            .filter_map(move |((di, dj), is_diag)| {
                let ni = i as i64 + di;
                let nj = j as i64 + dj;
                if ni < 0 || nj < 0 || ni >= self.width as i64 || nj >= self.height as i64 {
                    return None;
                }
                let c = (ni as usize, nj as usize);
                (!self.is_blocked(c)).then_some((c, is_diag))
            })
    }
}

fn rect_polygon_distance(lo: Vec2, hi: Vec2, poly: &Polygon) -> f64 {
    let corners = [lo, Vec2::new(hi.x, lo.y), hi, Vec2::new(lo.x, hi.y)];
    let inside_rect = |p: Vec2| p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y;
    if corners.iter().any(|c| poly.contains(*c)) || poly.vertices().iter().any(|v| inside_rect(*v)) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for (a, b) in poly.edges() {
        for k in 0..4 {
            best = best.min(segment_segment_distance(a, b, corners[k], corners[(k + 1) % 4]));
        }
    }
    best
}

/// Exact path cost `straight + diagonal * sqrt(2)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StepCost {
    pub straight: u64,
    pub diagonal: u64,
}

impl StepCost {
    pub fn value(self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    fn plus(self, diagonal: bool) -> Self {
        if diagonal {
            Self {
                diagonal: self.diagonal + 1,
                ..self
            }
        } else {
            Self {
                straight: self.straight + 1,
                ..self
            }
        }
    }
}

impl Ord for StepCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // sign of a - b*sqrt(2) with a = ds, b = -dd, decided in integers
        let a = self.straight as i128 - other.straight as i128;
        let b = other.diagonal as i128 - self.diagonal as i128;
        match (a.cmp(&0), b.cmp(&0)) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (Ordering::Greater | Ordering::Equal, Ordering::Less | Ordering::Equal) => Ordering::Greater,
            (Ordering::Less | Ordering::Equal, Ordering::Greater | Ordering::Equal) => Ordering::Less,
            (Ordering::Greater, Ordering::Greater) => (a * a).cmp(&(2 * b * b)),
            (Ordering::Less, Ordering::Less) => (2 * b * b).cmp(&(a * a)),
        }
    }
}

impl PartialOrd for StepCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPlan {
    pub resolution: f64,
    pub connectivity: Connectivity,
    pub algorithm: Algorithm,
    pub path: Vec<Cell>,
    pub cost: StepCost,
    /// Path length in meters, center of the start cell to center of the goal cell.
    pub length: f64,
    /// `length` plus the legs from the world's start to the first cell
    /// center and from the last center to the goal. Only set by
    /// [`grid_shortest_path`].
    pub world_length: Option<f64>,
    /// Cells popped from the frontier and closed.
    pub expanded: usize,
}

#[derive(PartialEq)]
struct Entry {
    f: f64,
    h: f64,
    index: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap: invert so the smallest f (then smallest h) pops first.
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Optimal path between two free cells. A* uses the straight-line distance
/// to the goal, which never overestimates under these step costs.
pub fn shortest_path(
    grid: &OccupancyGrid,
    start: Cell,
    goal: Cell,
    connectivity: Connectivity,
    algorithm: Algorithm,
) -> Result<GridPlan, ReferenceError> {
    for (what, c) in [("start", start), ("goal", goal)] {
        if c.0 >= grid.width || c.1 >= grid.height {
            return Err(ReferenceError::OutOfBounds(what));
        }
        if grid.is_blocked(c) {
            return Err(ReferenceError::Blocked(what));
        }
    }
    let heuristic = |(i, j): Cell| match algorithm {
        Algorithm::Dijkstra => 0.0,
        Algorithm::AStar => (i as f64 - goal.0 as f64).hypot(j as f64 - goal.1 as f64),
    };
    let n = grid.width * grid.height;
    let mut best: Vec<Option<StepCost>> = vec![None; n];
    let mut parent: Vec<usize> = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut expanded = 0;

    let s = grid.index(start);
    best[s] = Some(StepCost::default());
    heap.push(Entry {
        f: heuristic(start),
        h: heuristic(start),
        index: s,
    });
    let goal_index = grid.index(goal);
    while let Some(Entry { index, .. }) = heap.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        expanded += 1;
        if index == goal_index {
            break;
        }
        let cell = (index % grid.width, index / grid.width);
        let g = best[index].expect("popped cells have a cost");
        for (next, diagonal) in grid.neighbors(cell, connectivity) {
            let ni = grid.index(next);
            if closed[ni] {
                continue;
            }
            let cost = g.plus(diagonal);
            if best[ni].is_none_or(|b| cost < b) {
                best[ni] = Some(cost);
                parent[ni] = index;
                let h = heuristic(next);
                heap.push(Entry {
                    f: cost.value() + h,
                    h,
                    index: ni,
                });
            }
        }
    }
    let Some(cost) = best[goal_index].filter(|_| closed[goal_index]) else {
        return Err(ReferenceError::NoPath);
    };
    let mut path = vec![goal];
    let mut at = goal_index;
    while at != s {
        at = parent[at];
        path.push((at % grid.width, at / grid.width));
    }
    path.reverse();
    Ok(GridPlan {
        resolution: grid.resolution,
        connectivity,
        algorithm,
        path,
        cost,
        length: cost.value() * grid.resolution,
        world_length: None,
        expanded,
    })
}

/// Plans from the world's start to its goal on a grid of the given resolution.
pub fn grid_shortest_path(
    world: &WorldSpec,
    resolution: f64,
    connectivity: Connectivity,
    algorithm: Algorithm,
) -> Result<GridPlan, ReferenceError> {
    let grid = OccupancyGrid::from_world(world, resolution)?;
    let start = grid
        .cell_of(world.start.position)
        .ok_or(ReferenceError::OutOfBounds("start"))?;
    let goal = grid.cell_of(world.goal).ok_or(ReferenceError::OutOfBounds("goal"))?;
    let mut plan = shortest_path(&grid, start, goal, connectivity, algorithm)?;
    plan.world_length = Some(
        world.start.position.distance(grid.center(start)) + plan.length + grid.center(goal).distance(world.goal),
    );
    Ok(plan)
}
