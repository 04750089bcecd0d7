//! Exact geometric queries shared by the simulator, the reference planner and the tests.

use serde::{Deserialize, Serialize};

use super::geometry::{Polygon, Vec2, GEOM_EPS};
use super::WorldSpec;

/// What a range ray struck first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorHit {
    Obstacle,
    Wall,
    /// Nothing within range.
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayHit {
    pub distance: f64,
    pub hit: SensorHit,
}

/// Distance along a unit-direction ray from `origin` to the closed segment `ab`.
pub fn ray_segment_distance(origin: Vec2, dir: Vec2, a: Vec2, b: Vec2) -> Option<f64> {
    let s = b - a;
    let ao = a - origin;
    let denom = dir.cross(s);
    let len = s.norm();
    if denom.abs() <= GEOM_EPS * len {
        // Parallel: only a collinear segment can be struck.
        if ao.cross(dir).abs() > GEOM_EPS {
            return None;
        }
        let ta = ao.dot(dir);
        let tb = (b - origin).dot(dir);
        if ta < -GEOM_EPS && tb < -GEOM_EPS {
            return None;
        }
        if ta.min(tb) <= GEOM_EPS {
            return Some(0.0);
        }
        return Some(ta.min(tb));
    }
    let t = ao.cross(s) / denom;
    let u = ao.cross(dir) / denom;
    let tol = GEOM_EPS / len;
    if t >= -GEOM_EPS && (-tol..=1.0 + tol).contains(&u) {
        Some(t.max(0.0))
    } else {
        None
    }
}

/// Nearest obstacle or wall hit along `direction`, clamped to `max_range`.
pub fn raycast_hit(world: &WorldSpec, origin: Vec2, direction: f64, max_range: f64) -> RayHit {
    let dir = Vec2::from_angle(direction);
    let mut best = RayHit {
        distance: max_range,
        hit: SensorHit::None,
    };
    for (a, b) in world.arena.walls() {
        if let Some(t) = ray_segment_distance(origin, dir, a, b) {
            if t < best.distance {
                best = RayHit {
                    distance: t,
                    hit: SensorHit::Wall,
                };
            }
        }
    }
    for poly in &world.obstacles {
        for (a, b) in poly.edges() {
            if let Some(t) = ray_segment_distance(origin, dir, a, b) {
                // obstacles win exact ties with walls
                if t < best.distance || (t == best.distance && best.hit == SensorHit::Wall) {
                    best = RayHit {
                        distance: t,
                        hit: SensorHit::Obstacle,
                    };
                }
            }
        }
    }
    best
}

pub fn raycast_with_range(world: &WorldSpec, origin: Vec2, direction: f64, max_range: f64) -> f64 {
    raycast_hit(world, origin, direction, max_range).distance
}

/// Ideal range sensor: distance from `origin` to the first obstacle edge or wall,
/// clamped to the world's `sensor_max_range`.
pub fn raycast(world: &WorldSpec, origin: Vec2, direction: f64) -> f64 {
    raycast_with_range(world, origin, direction, world.sensor_max_range)
}

/// True iff the disc touches the polygon boundary or lies (partly) in its interior.
pub fn circle_polygon_collides(center: Vec2, radius: f64, poly: &Polygon) -> bool {
    poly.contains(center) || poly.boundary_distance(center) <= radius + GEOM_EPS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub point: Vec2,
    /// Position along the query segment, 0 at `a` and 1 at `b`.
    pub param: f64,
}

/// All points where segment `ab` meets the polygon boundary, ordered by parameter.
/// Vertex hits and tangential touches appear once; collinear overlaps contribute
/// their two endpoints.
pub fn segment_polygon_intersections(a: Vec2, b: Vec2, poly: &Polygon) -> Vec<Intersection> {
    let d = b - a;
    let len = d.norm();
    let dir = d * (1.0 / len);
    let mut params: Vec<f64> = Vec::new();
    for (c, e) in poly.edges() {
        let s = e - c;
        let s_len = s.norm();
        let denom = d.cross(s);
        let ca = c - a;
        if denom.abs() <= GEOM_EPS * len * s_len {
            if ca.cross(dir).abs() > GEOM_EPS {
                continue;
            }
            // Collinear: project the edge onto ab and clip.
            let t0 = ca.dot(d) / (len * len);
            let t1 = (e - a).dot(d) / (len * len);
            let (lo, hi) = (t0.min(t1).max(0.0), t0.max(t1).min(1.0));
            if lo <= hi + GEOM_EPS / len {
                params.push(lo);
                params.push(hi.max(lo));
            }
            continue;
        }
        let t = ca.cross(s) / denom;
        let u = ca.cross(d) / denom;
        let tol_t = GEOM_EPS / len;
        let tol_u = GEOM_EPS / s_len;
        if (-tol_t..=1.0 + tol_t).contains(&t) && (-tol_u..=1.0 + tol_u).contains(&u) {
            params.push(t.clamp(0.0, 1.0));
        }
    }
    params.sort_by(f64::total_cmp);
    let mut out: Vec<Intersection> = Vec::with_capacity(params.len());
    for t in params {
        if let Some(last) = out.last() {
            if (t - last.param) * len <= GEOM_EPS * 10.0 {
                continue;
            }
        }
        out.push(Intersection {
            point: a.lerp(b, t),
            param: t,
        });
    }
    out
}
