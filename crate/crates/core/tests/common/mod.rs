//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use virtlab::dsl::{BinaryOp, Expr, ExprKind, Program, Span, StateDecl, Stmt, StmtKind, UnaryOp, BUILTINS};
use virtlab::reference::{Cell, OccupancyGrid};
use virtlab::world::{default_sensor_layout, Arena, Polygon, Pose, Vec2, WorldSpec};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Convex polygon from sorted random angles on a circle.
pub fn convex_polygon(rng: &mut impl Rng, center: Vec2, radius: f64, n: usize) -> Polygon {
    loop {
        let mut angles: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
        angles.sort_by(f64::total_cmp);
        let pts: Vec<Vec2> = angles.iter().map(|a| center + Vec2::from_angle(*a) * radius).collect();
        if let Ok(p) = Polygon::new(pts) {
            if p.area() > 0.05 * radius * radius {
                return p;
            }
        }
    }
}

fn world(arena: Arena, obstacles: Vec<Polygon>, start: Pose, goal: Vec2) -> WorldSpec {
    WorldSpec {
        arena,
        obstacles,
        start,
        goal,
        goal_radius: 0.3,
        robot_radius: 0.2,
        sensor_layout: default_sensor_layout(),
        sensor_max_range: 5.0,
    }
}

/// Start (0, 0), goal near (10, 0), one convex obstacle near the middle of
/// the line between them.
pub fn single_obstacle_world(rng: &mut impl Rng) -> WorldSpec {
    loop {
        let arena = Arena {
            min: Vec2::new(-2.0, -6.0),
            max: Vec2::new(12.0, 6.0),
        };
        let goal = Vec2::new(10.0, rng.random_range(-1.5..1.5));
        let center = Vec2::new(rng.random_range(3.0..7.0), rng.random_range(-1.2..1.2));
        let n = rng.random_range(3..=8);
        let radius = rng.random_range(0.5..2.0);
        let poly = convex_polygon(rng, center, radius, n);
        let w = world(arena, vec![poly], Pose::new(0.0, 0.0, 0.0), goal);
        if w.validate().is_ok() {
            return w;
        }
    }
}

/// Up to four scattered convex obstacles in a 12 x 8 arena.
pub fn scattered_world(rng: &mut impl Rng) -> WorldSpec {
    loop {
        let arena = Arena {
            min: Vec2::new(-1.0, -4.0),
            max: Vec2::new(11.0, 4.0),
        };
        let k = rng.random_range(0..=4);
        let obstacles = (0..k)
            .map(|_| {
                let c = Vec2::new(rng.random_range(1.0..9.0), rng.random_range(-3.0..3.0));
                let n = rng.random_range(3..=7);
                let radius = rng.random_range(0.3..1.5);
                convex_polygon(rng, c, radius, n)
            })
            .collect();
        let w = world(arena, obstacles, Pose::new(0.0, 0.0, 0.0), Vec2::new(10.0, 0.0));
        if w.validate().is_ok() {
            return w;
        }
    }
}

/// A point strictly inside the arena and outside every obstacle.
pub fn free_point(rng: &mut impl Rng, w: &WorldSpec) -> Vec2 {
    loop {
        let p = Vec2::new(
            rng.random_range(w.arena.min.x + 0.01..w.arena.max.x - 0.01),
            rng.random_range(w.arena.min.y + 0.01..w.arena.max.y - 0.01),
        );
        if !w.obstacles.iter().any(|o| o.contains(p) || o.boundary_distance(p) < 1e-3) {
            return p;
        }
    }
}

fn blocked(w: &WorldSpec, p: Vec2) -> bool {
    !(p.x > w.arena.min.x && p.x < w.arena.max.x && p.y > w.arena.min.y && p.y < w.arena.max.y)
        || w.obstacles.iter().any(|o| o.contains(p))
}

/// Walks the ray in `step` increments and returns the first sample that is
/// inside an obstacle or past a wall, capped at `max_range`.
pub fn march_ray(w: &WorldSpec, origin: Vec2, angle: f64, max_range: f64, step: f64) -> f64 {
    let dir = Vec2::from_angle(angle);
    let n = (max_range / step).ceil() as usize;
    for k in 1..=n {
        let t = (k as f64 * step).min(max_range);
        if blocked(w, origin + dir * t) {
            return t;
        }
    }
    max_range
}

/// Disc collision by sampling the rim and center.
pub fn disc_hits_sampled(w: &WorldSpec, c: Vec2, r: f64, samples: usize) -> bool {
    if blocked(w, c) {
        return true;
    }
    (0..samples).any(|i| {
        let a = TAU * i as f64 / samples as f64;
        (0..=4).any(|k| blocked(w, c + Vec2::from_angle(a) * (r * k as f64 / 4.0)))
    })
}

/// Random occupancy grid with free start and goal cells.
pub fn random_grid(rng: &mut impl Rng) -> (OccupancyGrid, Cell, Cell) {
    let width = rng.random_range(2..=50);
    let height = rng.random_range(2..=50);
    let density = rng.random_range(0.0..0.45);
    let mut mask: Vec<bool> = (0..width * height).map(|_| rng.random_bool(density)).collect();
    let start = (rng.random_range(0..width), rng.random_range(0..height));
    let goal = (rng.random_range(0..width), rng.random_range(0..height));
    mask[start.1 * width + start.0] = false;
    mask[goal.1 * width + goal.0] = false;
    (OccupancyGrid::from_cells(width, height, mask), start, goal)
}

// ---- random programs -------------------------------------------------------

const NAMES: &[&str] = &["a", "b", "c", "speed", "turn", "n", "k2", "x_1", "flag", "dist"];

struct Scope {
    frames: Vec<Vec<String>>,
}

impl Scope {
    fn visible(&self) -> Vec<String> {
        self.frames.iter().flatten().cloned().collect()
    }

    fn fresh(&self, rng: &mut impl Rng) -> Option<String> {
        let used = self.visible();
        let free: Vec<&&str> = NAMES.iter().filter(|n| !used.iter().any(|u| u == **n)).collect();
        if free.is_empty() {
            None
        } else {
            Some(free[rng.random_range(0..free.len())].to_string())
        }
    }
}

fn sp() -> Span {
    Span::default()
}

fn number(rng: &mut impl Rng) -> f64 {
    match rng.random_range(0..5) {
        0 => rng.random_range(0..100) as f64,
        1 => rng.random_range(0.0..10.0),
        2 => rng.random_range(0..1000) as f64 / 8.0,
        3 => 10f64.powi(rng.random_range(-7..12)),
        _ => [0.0, 0.5, 1.0, PI, 0.1][rng.random_range(0..5)],
    }
}

pub fn random_expr(rng: &mut impl Rng, vars: &[String], depth: u32) -> Expr {
    let leaf = depth == 0 || rng.random_bool(0.3);
    let kind = if leaf {
        match rng.random_range(0..4) {
            0 | 1 => ExprKind::Number(number(rng)),
            2 => ExprKind::Bool(rng.random_bool(0.5)),
            _ if !vars.is_empty() => ExprKind::Var(vars[rng.random_range(0..vars.len())].clone()),
            _ => ExprKind::Number(number(rng)),
        }
    } else {
        match rng.random_range(0..6) {
            0 => ExprKind::Unary(
                if rng.random_bool(0.5) { UnaryOp::Neg } else { UnaryOp::Not },
                Box::new(random_expr(rng, vars, depth - 1)),
            ),
            1 => {
                let (name, arity) = BUILTINS[rng.random_range(0..BUILTINS.len())];
                ExprKind::Call(name.to_string(), (0..arity).map(|_| random_expr(rng, vars, depth - 1)).collect())
            }
            _ => ExprKind::Binary(
                BinaryOp::ALL[rng.random_range(0..BinaryOp::ALL.len())],
                Box::new(random_expr(rng, vars, depth - 1)),
                Box::new(random_expr(rng, vars, depth - 1)),
            ),
        }
    };
    Expr::new(kind, sp())
}

fn random_block(rng: &mut impl Rng, scope: &mut Scope, depth: u32) -> Vec<Stmt> {
    scope.frames.push(Vec::new());
    let n = rng.random_range(0..=if depth == 0 { 2 } else { 4 });
    let mut out = Vec::new();
    for _ in 0..n {
        out.push(random_stmt(rng, scope, depth));
    }
    scope.frames.pop();
    out
}

fn random_stmt(rng: &mut impl Rng, scope: &mut Scope, depth: u32) -> Stmt {
    let vars = scope.visible();
    let e = |rng: &mut _| random_expr(rng, &vars, 3);
    let choice = rng.random_range(0..if depth == 0 { 3 } else { 5 });
    let kind = match choice {
        0 => match scope.fresh(rng) {
            Some(name) => {
                let value = e(rng);
                scope.frames.last_mut().expect("open frame").push(name.clone());
                StmtKind::Let { name, value }
            }
            None => StmtKind::Drive { v: e(rng), omega: e(rng) },
        },
        1 if !vars.is_empty() => StmtKind::Assign {
            name: vars[rng.random_range(0..vars.len())].clone(),
            value: e(rng),
        },
        1 | 2 => StmtKind::Drive { v: e(rng), omega: e(rng) },
        3 => {
            let k = rng.random_range(1..=3);
            let branches = (0..k).map(|_| (e(rng), random_block(rng, scope, depth - 1))).collect();
            let otherwise = rng.random_bool(0.5).then(|| random_block(rng, scope, depth - 1));
            StmtKind::If { branches, otherwise }
        }
        _ => StmtKind::While {
            cond: e(rng),
            body: random_block(rng, scope, depth - 1),
        },
    };
    Stmt { kind, span: sp() }
}

/// A random program that satisfies the scoping rules.
pub fn random_program(rng: &mut impl Rng) -> Program {
    let mut scope = Scope { frames: vec![Vec::new()] };
    let mut state = Vec::new();
    for _ in 0..rng.random_range(0..=3) {
        let vars = scope.visible();
        let init = random_expr(rng, &vars, 2);
        if let Some(name) = scope.fresh(rng) {
            scope.frames[0].push(name.clone());
            state.push(StateDecl { name, init, span: sp() });
        }
    }
    let tick = random_block(rng, &mut scope, 3);
    Program { state, tick }
}
