//! Assignment scenario model: arena, obstacles, start pose, goal disc and sensor layout.
//!
//! World files are TOML:
//!
//! ```toml
//! arena = { min = [-1.0, -3.0], max = [11.0, 3.0] }
//! start = { pos = [0.0, 0.0], heading = 0.0 }
//! goal = { pos = [10.0, 0.0], radius = 0.3 }
//! robot = { radius = 0.2 }
//! sensors = { angles = [0.0, 1.5707963267948966, -1.5707963267948966], max_range = 5.0 }
//!
//! [[obstacle]]
//! vertices = [[4.0, -1.0], [6.0, -1.0], [6.0, 1.0], [4.0, 1.0]]
//! ```
//!
//! `robot` and `sensors` fall back to the simulator defaults when omitted.

mod geometry;
mod query;

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use geometry::{
    closest_point_on_segment, normalize_angle, point_segment_distance, segment_segment_distance,
    segments_intersect, Polygon, Pose, Vec2, GEOM_EPS,
};
pub use query::{
    circle_polygon_collides, ray_segment_distance, raycast, raycast_hit, raycast_with_range,
    segment_polygon_intersections, Intersection, RayHit, SensorHit,
};

pub const DEFAULT_ROBOT_RADIUS: f64 = 0.2;
pub const DEFAULT_SENSOR_MAX_RANGE: f64 = 5.0;

pub fn default_sensor_layout() -> Vec<f64> {
    vec![0.0, FRAC_PI_2, -FRAC_PI_2]
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("{line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid world: {0}")]
    Validation(String),
}

impl WorldError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        WorldError::Validation(msg.into())
    }

    /// Converts a TOML error into a positioned parse error against `text`.
    pub fn from_toml(err: &toml::de::Error, text: &str) -> Self {
        let (line, column) = err
            .span()
            .map(|s| line_col(text, s.start))
            .unwrap_or((1, 1));
        WorldError::Parse {
            line,
            column,
            message: err.message().trim().to_string(),
        }
    }
}

/// 1-based line and column of a byte offset.
pub(crate) fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before
        .rfind('\n')
        .map_or(before.chars().count(), |i| before[i + 1..].chars().count())
        + 1;
    (line, column)
}

/// Axis-aligned arena bounds. Walls are solid for sensing and collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Arena {
    pub min: Vec2,
    pub max: Vec2,
}

impl Arena {
    pub fn contains(&self, p: Vec2) -> bool {
        p.x > self.min.x && p.x < self.max.x && p.y > self.min.y && p.y < self.max.y
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    /// Distance from an interior point to the nearest wall.
    pub fn wall_distance(&self, p: Vec2) -> f64 {
        (p.x - self.min.x)
            .min(self.max.x - p.x)
            .min(p.y - self.min.y)
            .min(self.max.y - p.y)
    }

    pub fn walls(&self) -> [(Vec2, Vec2); 4] {
        let (lo, hi) = (self.min, self.max);
        [
            (lo, Vec2::new(hi.x, lo.y)),
            (Vec2::new(hi.x, lo.y), hi),
            (hi, Vec2::new(lo.x, hi.y)),
            (Vec2::new(lo.x, hi.y), lo),
        ]
    }
}

/// The physical scenario of an assignment. Immutable once validated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WorldFile", into = "WorldFile")]
pub struct WorldSpec {
    pub arena: Arena,
    pub obstacles: Vec<Polygon>,
    pub start: Pose,
    pub goal: Vec2,
    pub goal_radius: f64,
    pub robot_radius: f64,
    pub sensor_layout: Vec<f64>,
    pub sensor_max_range: f64,
}

impl WorldSpec {
    /// Checks every scenario invariant, naming the first one violated.
    pub fn validate(&self) -> Result<(), WorldError> {
        let finite = [self.goal_radius, self.robot_radius, self.sensor_max_range, self.start.heading]
            .iter()
            .all(|v| v.is_finite())
            && self.arena.min.is_finite()
            && self.arena.max.is_finite()
            && self.start.position.is_finite()
            && self.goal.is_finite()
            && self.sensor_layout.iter().all(|a| a.is_finite());
        if !finite {
            return Err(WorldError::invalid("non-finite number in world"));
        }
        if self.arena.min.x >= self.arena.max.x || self.arena.min.y >= self.arena.max.y {
            return Err(WorldError::invalid("arena min must be below max on both axes"));
        }
        if self.goal_radius <= 0.0 {
            return Err(WorldError::invalid("goal radius must be positive"));
        }
        if self.robot_radius <= 0.0 {
            return Err(WorldError::invalid("robot radius must be positive"));
        }
        if self.sensor_max_range <= 0.0 {
            return Err(WorldError::invalid("sensor max_range must be positive"));
        }
        let angles: Vec<f64> = self.sensor_layout.iter().map(|a| normalize_angle(*a)).collect();
        for (i, a) in angles.iter().enumerate() {
            if angles[..i].iter().any(|b| (a - b).abs() <= GEOM_EPS) {
                return Err(WorldError::invalid(format!("sensor angle {} is duplicated", self.sensor_layout[i])));
            }
        }
        let start = self.start.position;
        if !self.arena.contains(start) || self.arena.wall_distance(start) <= self.robot_radius {
            return Err(WorldError::invalid("start outside arena"));
        }
        if !self.arena.contains(self.goal) {
            return Err(WorldError::invalid("goal outside arena"));
        }
        for (i, obstacle) in self.obstacles.iter().enumerate() {
            if circle_polygon_collides(start, self.robot_radius, obstacle) {
                return Err(WorldError::invalid(format!("start inside inflated obstacle {i}")));
            }
            if circle_polygon_collides(self.goal, self.robot_radius, obstacle) {
                return Err(WorldError::invalid(format!("goal inside inflated obstacle {i}")));
            }
        }
        Ok(())
    }

    /// True when a disc of `radius` at `center` touches any obstacle or wall.
    pub fn disc_collides(&self, center: Vec2, radius: f64) -> bool {
        if !self.arena.contains(center) || self.arena.wall_distance(center) <= radius + GEOM_EPS {
            return true;
        }
        self.obstacles
            .iter()
            .any(|o| circle_polygon_collides(center, radius, o))
    }

    pub fn robot_collides(&self, center: Vec2) -> bool {
        self.disc_collides(center, self.robot_radius)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&WorldFile::from(self.clone())).expect("world serializes to TOML")
    }
}

/// Parses and validates a world file.
pub fn load_world(text: &str) -> Result<WorldSpec, WorldError> {
    let file: WorldFile = toml::from_str(text).map_err(|e| WorldError::from_toml(&e, text))?;
    WorldSpec::try_from(file)
}

type Point = [f64; 2];

/// On-disk layout of a world; also the JSON shape of [`WorldSpec`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WorldFile {
    pub arena: ArenaFile,
    pub start: StartFile,
    pub goal: GoalFile,
    #[serde(default)]
    pub robot: Option<RobotFile>,
    #[serde(default)]
    pub sensors: Option<SensorsFile>,
    #[serde(default, rename = "obstacle")]
    pub obstacles: Vec<ObstacleFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArenaFile {
    pub min: Point,
    pub max: Point,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartFile {
    pub pos: Point,
    pub heading: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalFile {
    pub pos: Point,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotFile {
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensorsFile {
    pub angles: Vec<f64>,
    pub max_range: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstacleFile {
    pub vertices: Vec<Point>,
}

fn pt(p: Point) -> Vec2 {
    Vec2::new(p[0], p[1])
}

impl TryFrom<WorldFile> for WorldSpec {
    type Error = WorldError;

    fn try_from(file: WorldFile) -> Result<Self, WorldError> {
        let obstacles = file
            .obstacles
            .into_iter()
            .enumerate()
            .map(|(i, o)| {
                Polygon::new(o.vertices.into_iter().map(pt).collect()).map_err(|e| match e {
                    WorldError::Validation(m) => WorldError::Validation(format!("obstacle {i}: {m}")),
                    other => other,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let (sensor_layout, sensor_max_range) = match file.sensors {
            Some(s) => (s.angles, s.max_range),
            None => (default_sensor_layout(), DEFAULT_SENSOR_MAX_RANGE),
        };
        if !file.start.heading.is_finite() {
            return Err(WorldError::invalid("start heading is not finite"));
        }
        let world = WorldSpec {
            arena: Arena {
                min: pt(file.arena.min),
                max: pt(file.arena.max),
            },
            obstacles,
            start: Pose::new(file.start.pos[0], file.start.pos[1], file.start.heading),
            goal: pt(file.goal.pos),
            goal_radius: file.goal.radius,
            robot_radius: file.robot.map_or(DEFAULT_ROBOT_RADIUS, |r| r.radius),
            sensor_layout,
            sensor_max_range,
        };
        world.validate()?;
        Ok(world)
    }
}

impl From<WorldSpec> for WorldFile {
    fn from(w: WorldSpec) -> Self {
        WorldFile {
            arena: ArenaFile {
                min: [w.arena.min.x, w.arena.min.y],
                max: [w.arena.max.x, w.arena.max.y],
            },
            start: StartFile {
                pos: [w.start.position.x, w.start.position.y],
                heading: w.start.heading,
            },
            goal: GoalFile {
                pos: [w.goal.x, w.goal.y],
                radius: w.goal_radius,
            },
            robot: Some(RobotFile {
                radius: w.robot_radius,
            }),
            sensors: Some(SensorsFile {
                angles: w.sensor_layout,
                max_range: w.sensor_max_range,
            }),
            obstacles: w
                .obstacles
                .iter()
                .map(|p| ObstacleFile {
                    vertices: p.vertices().iter().map(|v| [v.x, v.y]).collect(),
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const W1: &str = r#"
arena = { min = [-1, -3], max = [11, 3] }
start = { pos = [0, 0], heading = 0 }
goal = { pos = [10, 0], radius = 0.3 }
robot = { radius = 0.2 }

[[obstacle]]
vertices = [[4, -1], [6, -1], [6, 1], [4, 1]]
"#;

    #[test]
    fn loads_w1() {
        let w = load_world(W1).unwrap();
        assert_eq!(w.obstacles.len(), 1);
        assert_eq!(w.obstacles[0].perimeter(), 8.0);
        assert_eq!(w.sensor_layout, default_sensor_layout());
        assert_eq!(w.sensor_max_range, 5.0);
        assert_eq!(w.goal, Vec2::new(10.0, 0.0));
    }

    #[test]
    fn zero_obstacles_is_valid() {
        let text = "arena = { min = [-5, -5], max = [5, 5] }\nstart = { pos = [0, 0], heading = 0 }\ngoal = { pos = [3, 0], radius = 0.3 }\n";
        let w = load_world(text).unwrap();
        assert!(w.obstacles.is_empty());
    }

    #[test]
    fn start_inside_obstacle_is_rejected() {
        let text = W1.replace("pos = [0, 0]", "pos = [5, 0]");
        match load_world(&text) {
            Err(WorldError::Validation(m)) => assert!(m.contains("start inside inflated obstacle"), "{m}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_file_has_position() {
        let text = "arena = { min = [-1, -3], max = [11, 3] }\nstart = { pos = [0, 0] }\ngoal = { pos = [10, 0], radius = 0.3 }\n";
        match load_world(text) {
            Err(WorldError::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("heading"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(load_world("arena = ["), Err(WorldError::Parse { .. })));
    }

    #[test]
    fn invariant_violations_are_named() {
        let cases = [
            (W1.replace("radius = 0.3", "radius = 0"), "goal radius"),
            (W1.replace("radius = 0.2", "radius = -1"), "robot radius"),
            (W1.replace("pos = [10, 0]", "pos = [20, 0]"), "goal outside arena"),
            (W1.replace("pos = [10, 0]", "pos = [6.1, 0]"), "goal inside inflated obstacle"),
            (
                W1.replace("[[obstacle]]", "sensors = { angles = [0.5, 0.5], max_range = 5 }\n[[obstacle]]"),
                "duplicated",
            ),
        ];
        for (text, needle) in cases {
            let err = load_world(&text).unwrap_err().to_string();
            assert!(err.contains(needle), "{err} should mention {needle}");
        }
    }

    #[test]
    fn self_intersecting_obstacle_rejected() {
        let text = W1.replace("[[4, -1], [6, -1], [6, 1], [4, 1]]", "[[4, -1], [6, 1], [6, -1], [4, 1]]");
        let err = load_world(&text).unwrap_err().to_string();
        assert!(err.contains("self-intersecting"), "{err}");
    }

    #[test]
    fn json_and_toml_roundtrip() {
        let w = load_world(W1).unwrap();
        let json = serde_json::to_string(&w).unwrap();
        let back: WorldSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, w);
        assert_eq!(load_world(&w.to_toml()).unwrap(), w);
    }
}
