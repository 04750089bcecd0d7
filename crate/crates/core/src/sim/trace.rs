use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::SimConfig;
use crate::dsl::{Command, RuntimeError};
use crate::world::{Pose, SensorHit, Vec2, WorldSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    Collision,
    GoalReached,
    RuntimeError,
    BudgetExceeded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    GoalReached,
    Collision,
    TickLimit,
    RuntimeError,
    BudgetExceeded,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::GoalReached => "goal_reached",
            Termination::Collision => "collision",
            Termination::TickLimit => "tick_limit",
            Termination::RuntimeError => "runtime_error",
            Termination::BudgetExceeded => "budget_exceeded",
        })
    }
}

impl Termination {
    /// The event the final record must carry, if any.
    pub fn event(self) -> Option<Event> {
        match self {
            Termination::GoalReached => Some(Event::GoalReached),
            Termination::Collision => Some(Event::Collision),
            Termination::RuntimeError => Some(Event::RuntimeError),
            Termination::BudgetExceeded => Some(Event::BudgetExceeded),
            Termination::TickLimit => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub tick: u64,
    /// Pose after this tick's integration step.
    pub pose: Pose,
    pub commanded: Option<Command>,
    /// Command after clamping; a stop when nothing was commanded.
    pub applied: Command,
    /// Ray distances read before integration, one per configured sensor.
    pub sensors: Vec<f64>,
    /// What each ray struck. Empty in hand-built traces, which treats every
    /// reading as an obstacle.
    #[serde(default)]
    pub sensor_hits: Vec<SensorHit>,
    #[serde(default)]
    pub events: Vec<Event>,
}

impl TickRecord {
    pub fn has(&self, e: Event) -> bool {
        self.events.contains(&e)
    }

    /// Closest reading whose ray struck an obstacle (walls excluded).
    pub fn min_obstacle_reading(&self) -> Option<f64> {
        self.sensors
            .iter()
            .enumerate()
            .filter(|(i, _)| self.sensor_hits.get(*i).is_none_or(|h| *h == SensorHit::Obstacle))
            .map(|(_, d)| *d)
            .reduce(f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoalRegion {
    pub pos: Vec2,
    pub radius: f64,
}

/// Immutable record of one episode; the only input to the behavioral tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub world_digest: String,
    pub config: SimConfig,
    pub goal: GoalRegion,
    pub termination: Termination,
    pub path_length: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<RuntimeError>,
    pub records: Vec<TickRecord>,
}

impl Trace {
    pub(super) fn finalize(
        world: &WorldSpec,
        config: &SimConfig,
        goal: GoalRegion,
        records: Vec<TickRecord>,
        termination: Termination,
        path_length: f64,
        error: Option<RuntimeError>,
    ) -> Self {
        Trace {
            world_digest: super::world_digest(world, config),
            config: *config,
            goal,
            termination,
            path_length,
            error,
            records,
        }
    }

    pub fn last(&self) -> &TickRecord {
        self.records.last().expect("trace has at least one record")
    }

    pub fn final_goal_distance(&self) -> f64 {
        self.last().pose.position.distance(self.goal.pos)
    }

    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("trace serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(bytes: &[u8]) -> serde_json::Result<Self> {
        serde_json::from_slice(bytes)
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_json()))
    }

    /// Sum of per-record position deltas, in record order.
    pub fn recomputed_path_length(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| w[1].pose.position.distance(w[0].pose.position))
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub tick: u64,
    pub pose: Pose,
    pub events: Vec<Event>,
}

/// Every `stride`-th record plus the final one, in order. A stride of 0 is treated as 1.
pub fn replay_frames(trace: &Trace, stride: usize) -> Vec<Frame> {
    let stride = stride.max(1);
    let n = trace.records.len();
    let frame = |r: &TickRecord| Frame {
        tick: r.tick,
        pose: r.pose,
        events: r.events.clone(),
    };
    let mut frames: Vec<Frame> = trace.records.iter().step_by(stride).map(frame).collect();
    if !(n - 1).is_multiple_of(stride) {
        frames.push(frame(&trace.records[n - 1]));
    }
    frames
}
