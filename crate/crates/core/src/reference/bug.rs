//! Ideal right-turning Bug-2 path for a point robot.

use serde::{Deserialize, Serialize};

use super::ReferenceError;
use crate::world::{segment_polygon_intersections, Polygon, Vec2, WorldSpec, GEOM_EPS};

/// Ideal path decomposed as `L_total = L_pre + P_followed + L_post`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePath {
    pub polyline: Vec<Vec2>,
    /// Straight run from the start to the hit point (the whole path when nothing is hit).
    #[serde(rename = "L_pre")]
    pub l_pre: f64,
    /// Boundary length followed between hit and leave points.
    #[serde(rename = "P_followed")]
    pub p_followed: f64,
    /// Straight run from the leave point to the goal.
    #[serde(rename = "L_post")]
    pub l_post: f64,
    #[serde(rename = "L_total")]
    pub l_total: f64,
    pub hit_point: Option<Vec2>,
    pub leave_point: Option<Vec2>,
    /// Always `"bug2"`.
    pub variant: String,
}

impl ReferencePath {
    pub fn arc_length(&self) -> f64 {
        self.polyline.windows(2).map(|w| w[0].distance(w[1])).sum()
    }
}

fn strictly_inside(poly: &Polygon, p: Vec2) -> bool {
    poly.contains(p) && poly.boundary_distance(p) > GEOM_EPS
}

/// Parameters along `a -> b` where the segment enters the polygon interior,
/// paired with the parameter where it exits again.
fn interior_runs(a: Vec2, b: Vec2, poly: &Polygon) -> Vec<(f64, f64)> {
    let mut cuts: Vec<f64> = vec![0.0];
    cuts.extend(segment_polygon_intersections(a, b, poly).iter().map(|i| i.param));
    cuts.push(1.0);
    cuts.windows(2)
        .filter(|w| w[1] - w[0] > 0.0 && strictly_inside(poly, a.lerp(b, (w[0] + w[1]) / 2.0)))
        .map(|w| (w[0], w[1]))
        .collect()
}

/// Follows the m-line from start to goal, turns right at the first obstacle
/// hit, follows its boundary until the m-line is met strictly closer to the
/// goal, then heads straight for the goal.
pub fn bug_reference_path(world: &WorldSpec) -> Result<ReferencePath, ReferenceError> {
    let start = world.start.position;
    let goal = world.goal;
    if start.distance(goal) <= GEOM_EPS {
        return Ok(straight(start, goal));
    }

    let crossing: Vec<(usize, f64)> = world
        .obstacles
        .iter()
        .enumerate()
        .filter_map(|(i, p)| interior_runs(start, goal, p).first().map(|r| (i, r.0)))
        .collect();
    let (idx, hit_param) = match crossing.as_slice() {
        [] => return Ok(straight(start, goal)),
        [one] => *one,
        many => {
            return Err(ReferenceError::UnsupportedWorld(format!(
                "{} obstacles cross the start-goal line; only a single detour is supported",
                many.len()
            )))
        }
    };
    let poly = &world.obstacles[idx];
    let hit = start.lerp(goal, hit_param);
    let heading = (goal - start).normalized();
    let right = heading.perp_cw();

    let (edge, at_vertex) = locate(poly, hit);
    let n = poly.len();
    let verts = poly.vertices();
    // Tangent candidates leaving the hit point in each direction.
    let ccw_next = verts[(edge + 1) % n];
    let cw_next = if at_vertex { verts[(edge + n - 1) % n] } else { verts[edge] };
    let ccw_tangent = (ccw_next - hit).normalized();
    let cw_tangent = (cw_next - hit).normalized();
    let ccw = ccw_tangent.dot(right) >= cw_tangent.dot(right);

    // Boundary corners in traversal order, closing back on the hit point.
    let mut corners: Vec<Vec2> = Vec::with_capacity(n + 1);
    if ccw {
        for k in 1..=n {
            corners.push(verts[(edge + k) % n]);
        }
    } else {
        let first = if at_vertex { edge + n - 1 } else { edge };
        for k in 0..n {
            corners.push(verts[(first + n - k) % n]);
        }
    }
    corners.retain(|c| c.distance(hit) > GEOM_EPS);
    corners.push(hit);

    let hit_dist = hit.distance(goal);
    let mut followed = vec![hit];
    let mut p_followed = 0.0;
    let mut from = hit;
    for &to in &corners {
        let mut candidates: Vec<(f64, Vec2)> = boundary_mline_crossings(from, to, start, goal);
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (t, q) in candidates {
            let travelled = from.distance(q);
            if (travelled <= GEOM_EPS && from == hit) || t < 0.0 {
                continue;
            }
            if q.distance(goal) < hit_dist - GEOM_EPS && leaves_freely(poly, q, goal) {
                if interior_runs(q, goal, poly).iter().any(|r| r.1 - r.0 > 0.0) {
                    return Err(ReferenceError::UnsupportedWorld(
                        "the start-goal line re-enters the obstacle after leaving it".into(),
                    ));
                }
                p_followed += travelled;
                if q.distance(*followed.last().expect("non-empty")) > GEOM_EPS {
                    followed.push(q);
                }
                let l_pre = start.distance(hit);
                let l_post = q.distance(goal);
                let mut polyline = vec![start];
                polyline.extend(followed);
                if goal.distance(*polyline.last().expect("non-empty")) > 0.0 {
                    polyline.push(goal);
                }
                return Ok(ReferencePath {
                    polyline,
                    l_pre,
                    p_followed,
                    l_post,
                    l_total: l_pre + p_followed + l_post,
                    hit_point: Some(hit),
                    leave_point: Some(q),
                    variant: "bug2".into(),
                });
            }
        }
        p_followed += from.distance(to);
        followed.push(to);
        from = to;
    }
    Err(ReferenceError::UnsupportedWorld(
        "no leave point found while following the obstacle boundary".into(),
    ))
}

fn straight(start: Vec2, goal: Vec2) -> ReferencePath {
    let d = start.distance(goal);
    ReferencePath {
        polyline: vec![start, goal],
        l_pre: d,
        p_followed: 0.0,
        l_post: 0.0,
        l_total: d,
        hit_point: None,
        leave_point: None,
        variant: "bug2".into(),
    }
}

/// Edge index containing `p`, and whether `p` coincides with that edge's first vertex.
fn locate(poly: &Polygon, p: Vec2) -> (usize, bool) {
    let verts = poly.vertices();
    if let Some(i) = verts.iter().position(|v| v.distance(p) <= GEOM_EPS * 10.0) {
        return (i, true);
    }
    let (i, _) = poly
        .edges()
        .enumerate()
        .map(|(i, (a, b))| (i, crate::world::point_segment_distance(p, a, b)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("polygon has edges");
    (i, false)
}

/// Points where the boundary piece `from -> to` meets the m-line segment,
/// with their parameter along the piece.
fn boundary_mline_crossings(from: Vec2, to: Vec2, start: Vec2, goal: Vec2) -> Vec<(f64, Vec2)> {
    let d = to - from;
    let m = goal - start;
    let len = d.norm();
    let denom = d.cross(m);
    let fs = start - from;
    if denom.abs() <= GEOM_EPS * len * m.norm() {
        // Parallel; a collinear overlap contributes its endpoints.
        if fs.cross(d).abs() > GEOM_EPS * len {
            return Vec::new();
        }
        let proj = |p: Vec2| (p - from).dot(d) / (len * len);
        let (ts, tg) = (proj(start), proj(goal));
        let (lo, hi) = (ts.min(tg).max(0.0), ts.max(tg).min(1.0));
        if lo > hi {
            return Vec::new();
        }
        return vec![(lo, from.lerp(to, lo)), (hi, from.lerp(to, hi))];
    }
    let t = fs.cross(m) / denom;
    let u = fs.cross(d) / denom;
    let tol = GEOM_EPS / len;
    if (-tol..=1.0 + tol).contains(&t) && (-GEOM_EPS..=1.0 + GEOM_EPS).contains(&u) {
        let t = t.clamp(0.0, 1.0);
        vec![(t, from.lerp(to, t))]
    } else {
        Vec::new()
    }
}

/// True when the straight run from `q` toward the goal starts outside the obstacle.
fn leaves_freely(poly: &Polygon, q: Vec2, goal: Vec2) -> bool {
    let runs = interior_runs(q, goal, poly);
    !runs.first().is_some_and(|r| r.0 <= GEOM_EPS / q.distance(goal).max(GEOM_EPS))
}
