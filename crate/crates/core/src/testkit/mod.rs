//! Behavioral unit tests: predicates over a finished [`Trace`].
//!
//! Every check reads applied (clamped) commands and is a pure function of the
//! trace and its params.

mod spec;

pub use spec::{EdgeParams, PathParams, SmoothParams, SpecError, StallParams, TestKind, TestParams, TestSpec};

use serde::{Deserialize, Serialize};

use crate::reference::ReferencePath;
use crate::sim::{Event, Termination, TickRecord, Trace};
use crate::world::Pose;

/// Slack on command-delta comparisons so that e.g. 0.9 - 0.7 counts as 0.2.
const DELTA_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub tick: u64,
    pub pose: Pose,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub kind: TestKind,
    pub passed: bool,
    pub first_violation: Option<Violation>,
    pub measured: f64,
    pub weight: f64,
}

impl TestResult {
    fn pass(kind: TestKind, measured: f64) -> Self {
        Self {
            kind,
            passed: true,
            first_violation: None,
            measured,
            weight: 1.0,
        }
    }

    fn fail(kind: TestKind, measured: f64, at: &TickRecord, detail: String) -> Self {
        Self {
            kind,
            passed: false,
            first_violation: Some(Violation {
                tick: at.tick,
                pose: at.pose,
                detail,
            }),
            measured,
            weight: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SuiteError {
    #[error("path_length test needs a reference path")]
    MissingReference,
}

/// Fails at the first record carrying a collision. `measured` counts collision records.
pub fn eval_no_collision(trace: &Trace) -> TestResult {
    let kind = TestKind::NoCollision;
    let hits = trace.records.iter().filter(|r| r.has(Event::Collision)).count();
    match trace.records.iter().find(|r| r.has(Event::Collision)) {
        None => TestResult::pass(kind, 0.0),
        Some(r) => TestResult::fail(
            kind,
            hits as f64,
            r,
            format!("collision at ({:.3}, {:.3})", r.pose.position.x, r.pose.position.y),
        ),
    }
}

/// Slides a window of `window_ticks` records over the pre-goal part of the
/// trace. A window's displacement is the distance travelled between its
/// first and last record. `measured` is the smallest window displacement
/// seen; traces shorter than one window pass.
pub fn eval_no_stall(trace: &Trace, p: &StallParams) -> TestResult {
    let kind = TestKind::NoStall;
    let goal_at = trace.records.iter().position(|r| r.has(Event::GoalReached));
    let records = match goal_at {
        Some(i) => &trace.records[..=i],
        None => &trace.records[..],
    };
    let w = p.window_ticks.max(1) as usize;
    if records.len() < w {
        let total: f64 = steps(records).sum();
        return TestResult::pass(kind, total);
    }
    // prefix[i] = distance travelled from record 0 to record i
    let mut prefix = Vec::with_capacity(records.len());
    let mut acc = 0.0;
    prefix.push(0.0);
    for d in steps(records) {
        acc += d;
        prefix.push(acc);
    }
    let mut worst = f64::INFINITY;
    let mut first: Option<(usize, f64)> = None;
    for end in (w - 1)..records.len() {
        let moved = prefix[end] - prefix[end + 1 - w];
        worst = worst.min(moved);
        if moved < p.min_displacement && first.is_none() {
            first = Some((end, moved));
        }
    }
    match first {
        None => TestResult::pass(kind, worst),
        Some((end, moved)) => {
            let r = &records[end];
            let from = records[end + 1 - w].tick;
            TestResult::fail(
                kind,
                worst,
                r,
                format!(
                    "moved {moved:.4} m over ticks {from}..={} (need {} m)",
                    r.tick, p.min_displacement
                ),
            )
        }
    }
}

fn steps(records: &[TickRecord]) -> impl Iterator<Item = f64> + '_ {
    records.windows(2).map(|w| w[1].pose.position.distance(w[0].pose.position))
}

/// At an edge (an obstacle reading below `d_trigger`) any turn faster than
/// `omega_eps` must be clockwise. `measured` counts left turns at edges.
pub fn eval_right_turns_at_edges(trace: &Trace, p: &EdgeParams) -> TestResult {
    let kind = TestKind::RightTurnsAtEdges;
    let bad = |r: &&TickRecord| {
        r.min_obstacle_reading().is_some_and(|d| d < p.d_trigger)
            && r.applied.omega.abs() > p.omega_eps
            && r.applied.omega > 0.0
    };
    let count = trace.records.iter().filter(bad).count();
    match trace.records.iter().find(bad) {
        None => TestResult::pass(kind, 0.0),
        Some(r) => TestResult::fail(
            kind,
            count as f64,
            r,
            format!(
                "turned left (omega {:.3} rad/s) with an obstacle {:.3} m away",
                r.applied.omega,
                r.min_obstacle_reading().unwrap_or(f64::NAN)
            ),
        ),
    }
}

/// Fraction of controller ticks whose applied command stays within the
/// per-tick delta bounds of the previous controller tick. The start snapshot
/// and a terminal error record are not controller ticks.
pub fn eval_smoothness(trace: &Trace, p: &SmoothParams) -> TestResult {
    let kind = TestKind::Smoothness;
    let driven: Vec<&TickRecord> = trace
        .records
        .iter()
        .filter(|r| r.tick > 0 && !r.has(Event::RuntimeError) && !r.has(Event::BudgetExceeded))
        .collect();
    let mut total = 0usize;
    let mut smooth = 0usize;
    let mut first: Option<(&TickRecord, f64, f64)> = None;
    for pair in driven.windows(2) {
        let dv = (pair[1].applied.v - pair[0].applied.v).abs();
        let dw = (pair[1].applied.omega - pair[0].applied.omega).abs();
        total += 1;
        if dv <= p.dv_max + DELTA_EPS && dw <= p.domega_max + DELTA_EPS {
            smooth += 1;
        } else if first.is_none() {
            first = Some((pair[1], dv, dw));
        }
    }
    let fraction = if total == 0 { 1.0 } else { smooth as f64 / total as f64 };
    if fraction >= p.pass_fraction {
        return TestResult::pass(kind, fraction);
    }
    let (r, dv, dw) = first.expect("a failing fraction implies a rough tick");
    TestResult::fail(
        kind,
        fraction,
        r,
        format!(
            "{:.1}% smooth ticks (need {:.1}%); first jump dv {dv:.3}, domega {dw:.3}",
            fraction * 100.0,
            p.pass_fraction * 100.0
        ),
    )
}

/// `measured` is the final distance to the goal center.
pub fn eval_goal_reached(trace: &Trace) -> TestResult {
    let kind = TestKind::GoalReached;
    let dist = trace.final_goal_distance();
    if trace.termination == Termination::GoalReached {
        return TestResult::pass(kind, dist);
    }
    TestResult::fail(
        kind,
        dist,
        trace.last(),
        format!("episode ended by {} {dist:.3} m from the goal", trace.termination),
    )
}

/// `measured` is the ratio of the trace's path length to the reference
/// length. Fails when the goal was not reached, at the last record, or when
/// the ratio exceeds `1 + tau`, at the tick where the bound was crossed.
pub fn eval_path_length(trace: &Trace, reference: &ReferencePath, p: &PathParams) -> TestResult {
    let kind = TestKind::PathLength;
    let ratio = trace.path_length / reference.l_total;
    let bound = (1.0 + p.tau) * reference.l_total;
    if trace.termination != Termination::GoalReached {
        return TestResult::fail(kind, ratio, trace.last(), "goal not reached, path length not graded".into());
    }
    if trace.path_length <= bound {
        return TestResult::pass(kind, ratio);
    }
    let mut acc = 0.0;
    let mut at = trace.last();
    for w in trace.records.windows(2) {
        acc += w[1].pose.position.distance(w[0].pose.position);
        if acc > bound {
            at = &w[1];
            break;
        }
    }
    TestResult::fail(
        kind,
        ratio,
        at,
        format!(
            "path {:.3} m exceeds {:.3} m ({:.0}% over reference {:.3} m allowed)",
            trace.path_length,
            bound,
            p.tau * 100.0,
            reference.l_total
        ),
    )
}

/// Evaluates one spec; `weight` is copied from the spec.
pub fn evaluate(trace: &Trace, spec: &TestSpec, reference: Option<&ReferencePath>) -> Result<TestResult, SuiteError> {
    let mut result = match &spec.params {
        TestParams::NoCollision => eval_no_collision(trace),
        TestParams::NoStall(p) => eval_no_stall(trace, p),
        TestParams::RightTurnsAtEdges(p) => eval_right_turns_at_edges(trace, p),
        TestParams::Smoothness(p) => eval_smoothness(trace, p),
        TestParams::GoalReached => eval_goal_reached(trace),
        TestParams::PathLength(p) => eval_path_length(trace, reference.ok_or(SuiteError::MissingReference)?, p),
    };
    result.weight = spec.weight;
    Ok(result)
}

/// Runs every spec in order.
pub fn run_suite(
    trace: &Trace,
    specs: &[TestSpec],
    reference: Option<&ReferencePath>,
) -> Result<Vec<TestResult>, SuiteError> {
    if reference.is_none() && specs.iter().any(|s| s.kind() == TestKind::PathLength) {
        return Err(SuiteError::MissingReference);
    }
    specs.iter().map(|s| evaluate(trace, s, reference)).collect()
}

pub(crate) fn default_title(kind: TestKind) -> &'static str {
    match kind {
        TestKind::NoCollision => "No collisions",
        TestKind::NoStall => "Keeps moving",
        TestKind::RightTurnsAtEdges => "Right turns at obstacle edges",
        TestKind::Smoothness => "Smooth motion",
        TestKind::GoalReached => "Reaches the goal",
        TestKind::PathLength => "Efficient path",
    }
}

pub(crate) fn default_purpose(kind: TestKind) -> &'static str {
    match kind {
        TestKind::NoCollision => "Checks that the robot never touches an obstacle or wall.",
        TestKind::NoStall => "Checks that the robot does not stop before reaching the goal.",
        TestKind::RightTurnsAtEdges => "Checks the turning direction while the robot is close to an obstacle.",
        TestKind::Smoothness => "Checks that speed and turn rate change gradually.",
        TestKind::GoalReached => "Checks that the robot ends inside the goal region.",
        TestKind::PathLength => "Compares the distance driven with the Bug reference path.",
    }
}

pub(crate) fn default_requirements(kind: TestKind) -> &'static str {
    match kind {
        TestKind::NoCollision => "The robot disc must stay clear of every obstacle and the arena walls.",
        TestKind::NoStall => "Every window of consecutive ticks before the goal must show some displacement.",
        TestKind::RightTurnsAtEdges => "When an obstacle is within the trigger distance, turns must be clockwise.",
        TestKind::Smoothness => "Most ticks must keep the change in v and omega within the allowed step.",
        TestKind::GoalReached => "The episode must end with the robot inside the goal radius.",
        TestKind::PathLength => "Reach the goal with a path no longer than the reference plus the tolerance.",
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::Command;
    use crate::sim::{GoalRegion, SimConfig};
    use crate::world::{SensorHit, Vec2};

    fn rec(tick: u64, x: f64, v: f64, omega: f64) -> TickRecord {
        TickRecord {
            tick,
            pose: Pose::new(x, 0.0, 0.0),
            commanded: Some(Command::new(v, omega)),
            applied: Command::new(v, omega),
            sensors: vec![5.0, 5.0, 5.0],
            sensor_hits: vec![SensorHit::None; 3],
            events: vec![],
        }
    }

    fn trace(records: Vec<TickRecord>, termination: Termination) -> Trace {
        let path_length = records
            .windows(2)
            .map(|w| w[1].pose.position.distance(w[0].pose.position))
            .sum();
        Trace {
            world_digest: String::new(),
            config: SimConfig::default(),
            goal: GoalRegion {
                pos: Vec2::new(10.0, 0.0),
                radius: 0.3,
            },
            termination,
            path_length,
            error: None,
            records,
        }
    }

    /// Constant speed `v` for `n` ticks after the start snapshot.
    fn cruise(n: u64, v: f64) -> Vec<TickRecord> {
        let mut out = vec![rec(0, 0.0, 0.0, 0.0)];
        for t in 1..=n {
            out.push(rec(t, v * 0.05 * t as f64, v, 0.0));
        }
        out
    }

    #[test]
    fn collision_at_tick_zero() {
        let mut r = rec(0, 0.0, 0.0, 0.0);
        r.events.push(Event::Collision);
        let res = eval_no_collision(&trace(vec![r], Termination::Collision));
        assert!(!res.passed);
        assert_eq!(res.first_violation.unwrap().tick, 0);
    }

    #[test]
    fn stall_on_idle_fails_at_window_end() {
        let records: Vec<_> = (0..60).map(|t| rec(t, 0.0, 0.0, 0.0)).collect();
        let res = eval_no_stall(&trace(records, Termination::TickLimit), &StallParams::default());
        assert!(!res.passed);
        assert_eq!(res.first_violation.unwrap().tick, 19);
        assert_eq!(res.measured, 0.0);
    }

    #[test]
    fn stall_constant_speed_passes() {
        let res = eval_no_stall(&trace(cruise(100, 1.0), Termination::TickLimit), &StallParams::default());
        assert!(res.passed);
        assert!((res.measured - 0.95).abs() < 1e-9);
    }

    /// Hand-checked: moving until tick 40, paused over ticks 41..=70, moving after.
    /// The first all-paused window is records 40..=59, ending at tick 59.
    #[test]
    fn stall_pause_detected_inside_pause() {
        let mut records = vec![rec(0, 0.0, 0.0, 0.0)];
        let mut x = 0.0;
        for t in 1..=120u64 {
            let v = if (41..=70).contains(&t) { 0.0 } else { 1.0 };
            x += v * 0.05;
            records.push(rec(t, x, v, 0.0));
        }
        let res = eval_no_stall(&trace(records, Termination::TickLimit), &StallParams::default());
        assert!(!res.passed);
        let tick = res.first_violation.unwrap().tick;
        assert_eq!(tick, 59);
        assert!((41..=70).contains(&tick));
    }

    #[test]
    fn stall_exempt_after_goal() {
        let mut records = cruise(30, 1.0);
        records.last_mut().unwrap().events.push(Event::GoalReached);
        let res = eval_no_stall(&trace(records, Termination::GoalReached), &StallParams::default());
        assert!(res.passed);
    }

    #[test]
    fn right_turn_rule() {
        let mut records = cruise(10, 0.5);
        records[3].sensors[0] = 0.4;
        records[3].sensor_hits[0] = SensorHit::Obstacle;
        records[3].applied.omega = -1.0;
        assert!(eval_right_turns_at_edges(&trace(records.clone(), Termination::TickLimit), &EdgeParams::default()).passed);
        records[5].sensors[1] = 0.5;
        records[5].sensor_hits[1] = SensorHit::Obstacle;
        records[5].applied.omega = 0.3;
        let res = eval_right_turns_at_edges(&trace(records.clone(), Termination::TickLimit), &EdgeParams::default());
        assert!(!res.passed);
        assert_eq!(res.first_violation.unwrap().tick, 5);
        // a wall at the same distance is not an edge
        records[5].sensor_hits[1] = SensorHit::Wall;
        assert!(eval_right_turns_at_edges(&trace(records, Termination::TickLimit), &EdgeParams::default()).passed);
    }

    #[test]
    fn smoothness_constant_and_alternating() {
        let res = eval_smoothness(&trace(cruise(50, 1.0), Termination::TickLimit), &SmoothParams::default());
        assert_eq!(res.measured, 1.0);
        assert!(res.passed);

        let mut records = vec![rec(0, 0.0, 0.0, 0.0)];
        for t in 1..=50 {
            records.push(rec(t, 0.0, 0.5, if t % 2 == 0 { 2.0 } else { -2.0 }));
        }
        let res = eval_smoothness(&trace(records, Termination::TickLimit), &SmoothParams::default());
        assert!(!res.passed);
        assert_eq!(res.measured, 0.0);
        assert_eq!(res.first_violation.unwrap().tick, 2);
    }

    /// 101 controller ticks give 100 pairs; five step changes in omega leave exactly 0.95.
    #[test]
    fn smoothness_boundary_is_inclusive() {
        let mut records = vec![rec(0, 0.0, 0.0, 0.0)];
        for t in 1..=101u64 {
            let steps = [10, 30, 50, 70, 90].iter().filter(|s| **s <= t).count();
            records.push(rec(t, 0.0, 0.5, (steps % 2) as f64));
        }
        let res = eval_smoothness(&trace(records, Termination::TickLimit), &SmoothParams::default());
        assert_eq!(res.measured, 0.95);
        assert!(res.passed);
        assert!(res.first_violation.is_none());
    }

    #[test]
    fn goal_reached_measures_distance() {
        let records = cruise(192, 1.0); // ends at x = 9.6
        let res = eval_goal_reached(&trace(records, Termination::TickLimit));
        assert!(!res.passed);
        assert!((res.measured - 0.4).abs() < 1e-9);
    }

    fn reference(total: f64) -> ReferencePath {
        ReferencePath {
            polyline: vec![Vec2::ZERO, Vec2::new(total, 0.0)],
            l_pre: total,
            p_followed: 0.0,
            l_post: 0.0,
            l_total: total,
            hit_point: None,
            leave_point: None,
            variant: "bug2".into(),
        }
    }

    #[test]
    fn path_length_thresholds() {
        let mut t = trace(cruise(10, 1.0), Termination::GoalReached);
        let p = PathParams::default();
        t.path_length = 13.0;
        let res = eval_path_length(&t, &reference(12.0), &p);
        assert!(res.passed);
        assert!((res.measured - 13.0 / 12.0).abs() < 1e-12);
        t.path_length = 14.0;
        assert!(!eval_path_length(&t, &reference(12.0), &p).passed);
        t.termination = Termination::TickLimit;
        t.path_length = 10.0;
        assert!(!eval_path_length(&t, &reference(12.0), &p).passed);
    }

    #[test]
    fn suite_order_and_missing_reference() {
        let t = trace(cruise(10, 1.0), Termination::TickLimit);
        assert_eq!(run_suite(&t, &[], None).unwrap(), vec![]);
        assert_eq!(
            run_suite(&t, &TestSpec::default_suite(), None),
            Err(SuiteError::MissingReference)
        );
        let specs = vec![
            TestSpec::of_kind(TestKind::GoalReached).with_weight(2.0),
            TestSpec::of_kind(TestKind::NoCollision),
        ];
        let res = run_suite(&t, &specs, None).unwrap();
        assert_eq!(res[0].kind, TestKind::GoalReached);
        assert_eq!(res[0].weight, 2.0);
        assert_eq!(res[1].kind, TestKind::NoCollision);
    }
}
