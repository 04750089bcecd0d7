//! Fixed-timestep episode runner.
//!
//! Record 0 is the start snapshot: the start pose, no command, and the
//! sensors as read at the start. Each later tick `t` reads the sensors at the
//! current pose, runs the controller, clamps its command, integrates one
//! explicit Euler step of the unicycle model and checks for collision and then
//! for goal arrival. The pose in record `t` is therefore the pose after `t`
//! integration steps.

mod trace;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use trace::{replay_frames, Event, Frame, GoalRegion, Termination, TickRecord, Trace};

use crate::dsl::{init_state, run_tick, Command, Program, RuntimeErrorKind, TickInputs, DEFAULT_STEP_BUDGET};
use crate::world::{normalize_angle, raycast_hit, Pose, SensorHit, Vec2, WorldSpec, GEOM_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollisionPolicy {
    #[default]
    HaltOnFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Seconds per tick.
    pub dt: f64,
    pub v_max: f64,
    pub omega_max: f64,
    pub max_ticks: u64,
    /// Interpreter steps allowed per tick.
    pub step_budget: u64,
    pub collision_policy: CollisionPolicy,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.05,
            v_max: 1.0,
            omega_max: 2.0,
            max_ticks: 4000,
            step_budget: DEFAULT_STEP_BUDGET,
            collision_policy: CollisionPolicy::HaltOnFirst,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid simulator config: {0}")]
pub struct ConfigError(pub String);

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.dt) {
            return Err(ConfigError("dt must be positive".into()));
        }
        if !positive(self.v_max) || !positive(self.omega_max) {
            return Err(ConfigError("v_max and omega_max must be positive".into()));
        }
        if self.max_ticks < 1 {
            return Err(ConfigError("max_ticks must be at least 1".into()));
        }
        if self.step_budget < 1 {
            return Err(ConfigError("step_budget must be at least 1".into()));
        }
        Ok(())
    }

    pub fn clamp(&self, c: Command) -> Command {
        Command {
            v: c.v.clamp(-self.v_max, self.v_max),
            omega: c.omega.clamp(-self.omega_max, self.omega_max),
        }
    }
}

/// Content hash of the scenario and simulator settings.
pub fn world_digest(world: &WorldSpec, config: &SimConfig) -> String {
    let bytes = serde_json::to_vec(&(world, config)).expect("world serializes");
    hex::encode(Sha256::digest(&bytes))
}

/// Reads every configured ray from `pose`.
pub fn sense(world: &WorldSpec, pose: &Pose) -> (Vec<f64>, Vec<SensorHit>) {
    world
        .sensor_layout
        .iter()
        .map(|a| {
            let hit = raycast_hit(world, pose.position, pose.heading + a, world.sensor_max_range);
            (hit.distance, hit.hit)
        })
        .unzip()
}

/// One explicit Euler step of the unicycle model.
pub fn integrate(pose: &Pose, cmd: Command, dt: f64) -> Pose {
    let (s, c) = pose.heading.sin_cos();
    Pose {
        position: Vec2::new(
            pose.position.x + cmd.v * c * dt,
            pose.position.y + cmd.v * s * dt,
        ),
        heading: normalize_angle(pose.heading + cmd.omega * dt),
    }
}

/// Runs `program` in `world` until goal, collision, controller error or the tick limit.
pub fn run_episode(world: &WorldSpec, program: &Program, config: &SimConfig) -> Trace {
    run_episode_until(world, program, config, || true).expect("never cancelled")
}

/// [`run_episode`] that polls `keep_going` before every tick and returns
/// `None` as soon as it answers false.
pub fn run_episode_until(
    world: &WorldSpec,
    program: &Program,
    config: &SimConfig,
    mut keep_going: impl FnMut() -> bool,
) -> Option<Trace> {
    let goal = GoalRegion {
        pos: world.goal,
        radius: world.goal_radius,
    };
    let mut pose = world.start;
    let mut records = Vec::new();
    let mut path_length = 0.0;

    let (sensors, sensor_hits) = sense(world, &pose);
    let first_inputs = TickInputs {
        sensors: sensors.clone(),
        pose,
        goal: world.goal,
        robot_radius: world.robot_radius,
        tick: 0,
    };
    let mut start = TickRecord {
        tick: 0,
        pose,
        commanded: None,
        applied: Command::STOP,
        sensors,
        sensor_hits,
        events: Vec::new(),
    };
    let mut state = match init_state(program, &first_inputs, config.step_budget) {
        Ok(s) => s,
        Err(e) => {
            let (event, termination) = error_event(e.kind);
            start.events.push(event);
            records.push(start);
            return Some(Trace::finalize(world, config, goal, records, termination, 0.0, Some(e)));
        }
    };
    records.push(start);

    for tick in 1..=config.max_ticks {
        if !keep_going() {
            return None;
        }
        let (sensors, sensor_hits) = sense(world, &pose);
        let inputs = TickInputs {
            sensors,
            pose,
            goal: world.goal,
            robot_radius: world.robot_radius,
            tick,
        };
        let outcome = run_tick(program, &mut state, &inputs, config.step_budget);
        if let Some(err) = outcome.error {
            let (event, termination) = error_event(err.kind);
            records.push(TickRecord {
                tick,
                pose,
                commanded: None,
                applied: Command::STOP,
                sensors: inputs.sensors,
                sensor_hits,
                events: vec![event],
            });
            return Some(Trace::finalize(world, config, goal, records, termination, path_length, Some(err)));
        }
        let applied = config.clamp(outcome.command.unwrap_or(Command::STOP));
        let next = integrate(&pose, applied, config.dt);
        path_length += next.position.distance(pose.position);
        pose = next;

        let mut events = Vec::new();
        let mut termination = None;
        if world.robot_collides(pose.position) {
            events.push(Event::Collision);
            termination = Some(Termination::Collision);
        } else if pose.position.distance(world.goal) < world.goal_radius - GEOM_EPS {
            events.push(Event::GoalReached);
            termination = Some(Termination::GoalReached);
        } else if tick == config.max_ticks {
            termination = Some(Termination::TickLimit);
        }
        records.push(TickRecord {
            tick,
            pose,
            commanded: outcome.command,
            applied,
            sensors: inputs.sensors,
            sensor_hits,
            events,
        });
        if let Some(t) = termination {
            return Some(Trace::finalize(world, config, goal, records, t, path_length, None));
        }
    }
    unreachable!("max_ticks >= 1 always terminates inside the loop")
}

fn error_event(kind: RuntimeErrorKind) -> (Event, Termination) {
    match kind {
        RuntimeErrorKind::Fault => (Event::RuntimeError, Termination::RuntimeError),
        RuntimeErrorKind::BudgetExceeded => (Event::BudgetExceeded, Termination::BudgetExceeded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::world::load_world;

    const W1: &str = r#"
arena = { min = [-1, -3], max = [11, 3] }
start = { pos = [0, 0], heading = 0 }
goal = { pos = [10, 0], radius = 0.3 }
[[obstacle]]
vertices = [[4, -1], [6, -1], [6, 1], [4, 1]]
"#;

    const OPEN: &str = r#"
arena = { min = [-5, -5], max = [5, 5] }
start = { pos = [0, 0], heading = 0 }
goal = { pos = [1, 0], radius = 0.3 }
"#;

    fn run(world: &str, src: &str, config: SimConfig) -> Trace {
        run_episode(&load_world(world).unwrap(), &parse(src).unwrap(), &config)
    }

    #[test]
    fn straight_drive_reaches_goal_at_tick_15() {
        let t = run(OPEN, "tick { drive(1.0, 0.0); }", SimConfig::default());
        assert_eq!(t.termination, Termination::GoalReached);
        let last = t.records.last().unwrap();
        assert_eq!(last.tick, 15);
        assert!((last.pose.position.x - 0.75).abs() < 1e-12);
        assert_eq!(last.events, vec![Event::GoalReached]);
    }

    #[test]
    fn idle_controller_hits_tick_limit() {
        let config = SimConfig {
            max_ticks: 50,
            ..SimConfig::default()
        };
        let t = run(OPEN, "tick { }", config);
        assert_eq!(t.termination, Termination::TickLimit);
        assert_eq!(t.records.len(), 51);
        assert_eq!(t.path_length, 0.0);
        assert!(t.records.iter().all(|r| r.applied == Command::STOP && r.commanded.is_none()));
    }

    #[test]
    fn straight_drive_collides_at_tick_76() {
        let t = run(W1, "tick { drive(1.0, 0.0); }", SimConfig::default());
        assert_eq!(t.termination, Termination::Collision);
        let last = t.records.last().unwrap();
        assert_eq!(last.tick, 76);
        assert_eq!(last.events, vec![Event::Collision]);
        assert!((last.pose.position.x - 3.8).abs() < 1e-9);
    }

    #[test]
    fn commands_are_clamped() {
        let t = run(W1, "tick { drive(5, -9); }", SimConfig::default());
        assert_eq!(t.records[1].commanded, Some(Command::new(5.0, -9.0)));
        assert_eq!(t.records[1].applied, Command::new(1.0, -2.0));
    }

    #[test]
    fn runtime_error_terminates_with_event() {
        let t = run(W1, "state { n = 0; } tick { n = n + 1; drive(1 / (3 - n), 0); }", SimConfig::default());
        assert_eq!(t.termination, Termination::RuntimeError);
        let last = t.records.last().unwrap();
        assert_eq!(last.tick, 3);
        assert_eq!(last.events, vec![Event::RuntimeError]);
        assert_eq!(last.pose, t.records[2].pose);
        assert!(t.error.as_ref().unwrap().message.contains("division by zero"));
    }

    #[test]
    fn state_init_error_is_recorded_at_tick_zero() {
        let t = run(W1, "state { a = 1 / 0; } tick { }", SimConfig::default());
        assert_eq!(t.records.len(), 1);
        assert_eq!(t.termination, Termination::RuntimeError);
        assert_eq!(t.records[0].events, vec![Event::RuntimeError]);
    }

    #[test]
    fn budget_exceeded_terminates() {
        let t = run(W1, "tick { while true { } }", SimConfig::default());
        assert_eq!(t.termination, Termination::BudgetExceeded);
        assert_eq!(t.records.len(), 2);
        assert_eq!(t.records[1].events, vec![Event::BudgetExceeded]);
    }

    #[test]
    fn sensors_read_before_integration() {
        let t = run(W1, "tick { drive(1.0, 0.0); }", SimConfig::default());
        assert_eq!(t.records[0].sensors[0], 4.0);
        assert_eq!(t.records[1].sensors[0], 4.0);
        assert!((t.records[2].sensors[0] - 3.95).abs() < 1e-12);
        assert_eq!(t.records[1].sensor_hits[0], SensorHit::Obstacle);
        assert_eq!(t.records[1].sensor_hits[1], SensorHit::Wall);
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::default().validate().is_ok());
        assert!(SimConfig { dt: 0.0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { max_ticks: 0, ..SimConfig::default() }.validate().is_err());
        assert!(SimConfig { omega_max: -1.0, ..SimConfig::default() }.validate().is_err());
    }

    #[test]
    fn cancelled_episode_returns_none() {
        let w = load_world(W1).unwrap();
        let p = parse("tick { drive(0.1, 0); }").unwrap();
        let mut polls = 0;
        let out = run_episode_until(&w, &p, &SimConfig::default(), || {
            polls += 1;
            polls < 10
        });
        assert!(out.is_none());
        assert_eq!(polls, 10);
    }

    #[test]
    fn digest_changes_with_config() {
        let w = load_world(W1).unwrap();
        let a = world_digest(&w, &SimConfig::default());
        let b = world_digest(&w, &SimConfig { dt: 0.1, ..SimConfig::default() });
        assert_ne!(a, b);
        assert_eq!(a.len(), 64);
    }
}
