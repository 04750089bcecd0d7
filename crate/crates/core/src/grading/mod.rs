//! Weighted scoring and the per-test feedback report.

mod assignment;
mod template;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

pub use assignment::{AssignmentError, AssignmentSpec};
pub use template::{check_template, default_hint, render as render_template, TemplateError, PLACEHOLDERS};

use crate::dsl::Program;
use crate::sim::{run_episode, Trace};
use crate::testkit::{run_suite, SuiteError, TestKind, TestResult};

pub const REPORT_SCHEMA: u32 = 1;
pub const UNGRADED_NOTE: &str = "ungraded (diagnostic only)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeedbackEntry {
    pub title: String,
    pub purpose: String,
    pub requirements: String,
    /// Measured values, rendered.
    pub outputs: String,
    /// Correction guidance; empty for passed tests.
    pub hint: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub result: TestResult,
    pub feedback: FeedbackEntry,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradeReport {
    pub schema: u32,
    pub assignment_id: String,
    /// Unrounded; see [`GradeReport::rounded_score`].
    pub score: f64,
    pub per_test: Vec<TestReport>,
    pub trace_ref: String,
    pub created_at: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl GradeReport {
    pub fn rounded_score(&self) -> f64 {
        round2(self.score)
    }

    pub fn passed_count(&self) -> usize {
        self.per_test.iter().filter(|t| t.result.passed).count()
    }

    pub fn all_passed(&self) -> bool {
        self.per_test.iter().all(|t| t.result.passed)
    }
}

/// Half-even rounding to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0).round_ties_even() / 100.0
}

/// `100 * sum(w * passed) / sum(w)`, or 0 when every weight is zero.
pub fn weighted_score(results: &[TestResult]) -> f64 {
    let total: f64 = results.iter().map(|r| r.weight).sum();
    if total <= 0.0 {
        return 0.0;
    }
    let earned: f64 = results.iter().filter(|r| r.passed).map(|r| r.weight).sum();
    (100.0 * earned / total).clamp(0.0, 100.0)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GradeError {
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Suite(#[from] SuiteError),
    #[error("{results} results for {specs} tests")]
    Mismatch { results: usize, specs: usize },
}

pub fn grade(results: &[TestResult], assignment: &AssignmentSpec, trace_ref: &str) -> Result<GradeReport, GradeError> {
    grade_at(results, assignment, trace_ref, Utc::now())
}

/// [`grade`] with a fixed timestamp.
pub fn grade_at(
    results: &[TestResult],
    assignment: &AssignmentSpec,
    trace_ref: &str,
    created_at: DateTime<Utc>,
) -> Result<GradeReport, GradeError> {
    if results.len() != assignment.tests.len() {
        return Err(GradeError::Mismatch {
            results: results.len(),
            specs: assignment.tests.len(),
        });
    }
    let l_total = assignment.reference.as_ref().map(|r| r.l_total);
    let mut per_test = Vec::with_capacity(results.len());
    for (i, (result, spec)) in results.iter().zip(&assignment.tests).enumerate() {
        let hint = if result.passed {
            String::new()
        } else {
            let name = format!("{}/{}#{i}", assignment.id, spec.kind());
            template::render(&name, assignment.hint_template(i), &hint_values(result, &spec.title, l_total))?
        };
        per_test.push(TestReport {
            result: result.clone(),
            feedback: FeedbackEntry {
                title: spec.title.clone(),
                purpose: spec.purpose.clone(),
                requirements: spec.requirements.clone(),
                outputs: outputs(result, l_total),
                hint,
            },
        });
    }
    let total_weight: f64 = results.iter().map(|r| r.weight).sum();
    let notes = if total_weight <= 0.0 {
        vec![UNGRADED_NOTE.to_string()]
    } else {
        vec![]
    };
    Ok(GradeReport {
        schema: REPORT_SCHEMA,
        assignment_id: assignment.id.clone(),
        score: weighted_score(results),
        per_test,
        trace_ref: trace_ref.to_string(),
        created_at,
        notes,
    })
}

fn hint_values<'a>(r: &TestResult, title: &str, l_total: Option<f64>) -> BTreeMap<&'a str, String> {
    let mut v = BTreeMap::new();
    v.insert("kind", r.kind.to_string());
    v.insert("title", title.to_string());
    v.insert("measured", fmt_measured(r.kind, r.measured));
    if let Some(l) = l_total {
        v.insert("l_total", format!("{l:.2}"));
    }
    if let Some(f) = &r.first_violation {
        v.insert("tick", f.tick.to_string());
        v.insert("x", format!("{:.2}", f.pose.position.x));
        v.insert("y", format!("{:.2}", f.pose.position.y));
        v.insert("heading", format!("{:.2}", f.pose.heading));
        v.insert("detail", f.detail.clone());
    }
    v
}

fn fmt_measured(kind: TestKind, m: f64) -> String {
    match kind {
        TestKind::NoCollision | TestKind::RightTurnsAtEdges => format!("{m:.0}"),
        TestKind::Smoothness => format!("{:.1}%", m * 100.0),
        TestKind::NoStall | TestKind::GoalReached => format!("{m:.3}"),
        TestKind::PathLength => format!("{m:.3}"),
    }
}

fn outputs(r: &TestResult, l_total: Option<f64>) -> String {
    let m = fmt_measured(r.kind, r.measured);
    let mut s = match r.kind {
        TestKind::NoCollision => format!("collisions: {m}"),
        TestKind::NoStall => format!("smallest window displacement: {m} m"),
        TestKind::RightTurnsAtEdges => format!("left turns at edges: {m}"),
        TestKind::Smoothness => format!("smooth ticks: {m}"),
        TestKind::GoalReached => format!("final distance to goal: {m} m"),
        TestKind::PathLength => match l_total {
            Some(l) => format!("path / reference: {m} (reference {l:.3} m)"),
            None => format!("path / reference: {m}"),
        },
    };
    if let Some(f) = &r.first_violation {
        let _ = write!(
            s,
            "; first violation at tick {} ({:.2}, {:.2}): {}",
            f.tick, f.pose.position.x, f.pose.position.y, f.detail
        );
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

pub fn render_report(report: &GradeReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => serde_json::to_vec_pretty(report).expect("report serializes"),
        ReportFormat::Text => render_text(report).into_bytes(),
    }
}

fn render_text(r: &GradeReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "assignment: {}", r.assignment_id);
    let _ = writeln!(out, "trace:      {}", r.trace_ref);
    let _ = writeln!(out, "created:    {}", r.created_at.to_rfc3339_opts(SecondsFormat::Secs, true));
    let _ = writeln!(out);
    let _ = writeln!(out, "{:<4} {:<22} {:>6}  {:<6} OUTPUTS", "#", "TEST", "WEIGHT", "RESULT");
    for (i, t) in r.per_test.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:<4} {:<22} {:>6}  {:<6} {}",
            i + 1,
            t.result.kind.name(),
            format!("{}", t.result.weight),
            if t.result.passed { "PASS" } else { "FAIL" },
            t.feedback.outputs
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "score: {:.2} / 100 ({} of {} passed)",
        r.rounded_score(),
        r.passed_count(),
        r.per_test.len()
    );
    for n in &r.notes {
        let _ = writeln!(out, "note: {n}");
    }
    let failed: Vec<_> = r.per_test.iter().enumerate().filter(|(_, t)| !t.result.passed).collect();
    if !failed.is_empty() {
        let _ = writeln!(out);
        let _ = writeln!(out, "hints:");
        for (i, t) in failed {
            let _ = writeln!(out, "  {} {}: {}", i + 1, t.feedback.title, t.feedback.hint);
        }
    }
    out
}

/// Trace, suite results and report for one program on one assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub trace: Trace,
    pub results: Vec<TestResult>,
    pub report: GradeReport,
}

/// Simulates, tests and grades `program`.
pub fn evaluate_program(assignment: &AssignmentSpec, program: &Program) -> Result<Evaluation, GradeError> {
    evaluate_program_at(assignment, program, Utc::now())
}

pub fn evaluate_program_at(
    assignment: &AssignmentSpec,
    program: &Program,
    created_at: DateTime<Utc>,
) -> Result<Evaluation, GradeError> {
    let trace = run_episode(&assignment.world, program, &assignment.sim);
    evaluate_trace_at(assignment, trace, created_at)
}

/// Tests and grades an already simulated trace.
pub fn evaluate_trace_at(
    assignment: &AssignmentSpec,
    trace: Trace,
    created_at: DateTime<Utc>,
) -> Result<Evaluation, GradeError> {
    let results = run_suite(&trace, &assignment.tests, assignment.reference.as_ref())?;
    let report = grade_at(&results, assignment, &trace.digest(), created_at)?;
    Ok(Evaluation { trace, results, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testkit::Violation;
    use crate::world::Pose;

    fn assignment() -> AssignmentSpec {
        AssignmentSpec::parse(
            r#"
arena = { min = [-1, -3], max = [11, 3] }
start = { pos = [0, 0], heading = 0 }
goal = { pos = [10, 0], radius = 0.3 }
[[obstacle]]
vertices = [[4, -1], [6, -1], [6, 1], [4, 1]]
[assignment]
id = "w1"
title = "W1"
"#,
            |_| unreachable!(),
        )
        .unwrap()
    }

    fn result(kind: TestKind, passed: bool, weight: f64) -> TestResult {
        TestResult {
            kind,
            passed,
            first_violation: (!passed).then(|| Violation {
                tick: 76,
                pose: Pose::new(3.8, 0.0, 0.0),
                detail: "collision".into(),
            }),
            measured: if passed { 0.0 } else { 1.0 },
            weight,
        }
    }

    fn results(pass: [bool; 6]) -> Vec<TestResult> {
        TestKind::ALL.iter().zip(pass).map(|(k, p)| result(*k, p, 1.0)).collect()
    }

    #[test]
    fn four_of_six() {
        let r = grade(&results([true, true, false, true, false, true]), &assignment(), "d").unwrap();
        assert!((r.score - 400.0 / 6.0).abs() < 1e-12);
        assert_eq!(r.rounded_score(), 66.67);
        assert_eq!(r.schema, 1);
    }

    #[test]
    fn all_pass_and_zero_weights() {
        let r = grade(&results([true; 6]), &assignment(), "d").unwrap();
        assert_eq!(r.score, 100.0);
        assert!(r.notes.is_empty());
        let zero: Vec<_> = results([true; 6]).into_iter().map(|mut r| {
            r.weight = 0.0;
            r
        }).collect();
        let r = grade(&zero, &assignment(), "d").unwrap();
        assert_eq!(r.score, 0.0);
        assert_eq!(r.notes, vec![UNGRADED_NOTE.to_string()]);
        assert!(String::from_utf8(render_report(&r, ReportFormat::Text)).unwrap().contains(UNGRADED_NOTE));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(round2(0.125), 0.12);
        assert_eq!(round2(0.375), 0.38);
        assert_eq!(round2(200.0 / 3.0), 66.67);
    }

    #[test]
    fn failed_entries_have_hints() {
        let r = grade(&results([false, true, true, true, true, true]), &assignment(), "d").unwrap();
        let f = &r.per_test[0].feedback;
        for field in [&f.title, &f.purpose, &f.requirements, &f.outputs, &f.hint] {
            assert!(!field.is_empty());
        }
        assert!(f.hint.contains("tick 76") && f.hint.contains("(3.80,0.00)"), "{}", f.hint);
        assert!(r.per_test[1].feedback.hint.is_empty());
    }

    #[test]
    fn bad_template_is_reported_by_name() {
        let mut a = assignment();
        a.tests[0].hint = Some("at {when}".into());
        let err = grade(&results([false; 6]), &a, "d").unwrap_err();
        assert!(err.to_string().contains("w1/no_collision"), "{err}");
    }

    #[test]
    fn json_roundtrip() {
        let r = grade(&results([true, false, true, false, true, true]), &assignment(), "d").unwrap();
        let back: GradeReport = serde_json::from_slice(&render_report(&r, ReportFormat::Json)).unwrap();
        assert_eq!(back, r);
    }
}
