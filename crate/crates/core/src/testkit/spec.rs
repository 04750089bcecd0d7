use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    NoCollision,
    NoStall,
    RightTurnsAtEdges,
    Smoothness,
    GoalReached,
    PathLength,
}

impl TestKind {
    pub const ALL: [TestKind; 6] = [
        TestKind::NoCollision,
        TestKind::NoStall,
        TestKind::RightTurnsAtEdges,
        TestKind::Smoothness,
        TestKind::GoalReached,
        TestKind::PathLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TestKind::NoCollision => "no_collision",
            TestKind::NoStall => "no_stall",
            TestKind::RightTurnsAtEdges => "right_turns_at_edges",
            TestKind::Smoothness => "smoothness",
            TestKind::GoalReached => "goal_reached",
            TestKind::PathLength => "path_length",
        }
    }
}

impl std::fmt::Display for TestKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StallParams {
    pub window_ticks: u64,
    /// Meters the robot must cover inside every window.
    pub min_displacement: f64,
}

impl Default for StallParams {
    fn default() -> Self {
        Self {
            window_ticks: 20,
            min_displacement: 0.005,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EdgeParams {
    /// An obstacle reading below this puts the robot at an edge.
    pub d_trigger: f64,
    /// Angular speeds at or below this are not turns.
    pub omega_eps: f64,
}

impl Default for EdgeParams {
    fn default() -> Self {
        Self {
            d_trigger: 0.6,
            omega_eps: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothParams {
    pub dv_max: f64,
    pub domega_max: f64,
    pub pass_fraction: f64,
}

impl Default for SmoothParams {
    fn default() -> Self {
        Self {
            dv_max: 0.2,
            domega_max: 0.5,
            pass_fraction: 0.95,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathParams {
    /// Allowed excess over the reference length, as a fraction.
    pub tau: f64,
}

impl Default for PathParams {
    fn default() -> Self {
        Self { tau: 0.15 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TestParams {
    NoCollision,
    NoStall(StallParams),
    RightTurnsAtEdges(EdgeParams),
    Smoothness(SmoothParams),
    GoalReached,
    PathLength(PathParams),
}

impl TestParams {
    pub fn default_for(kind: TestKind) -> Self {
        match kind {
            TestKind::NoCollision => TestParams::NoCollision,
            TestKind::NoStall => TestParams::NoStall(StallParams::default()),
            TestKind::RightTurnsAtEdges => TestParams::RightTurnsAtEdges(EdgeParams::default()),
            TestKind::Smoothness => TestParams::Smoothness(SmoothParams::default()),
            TestKind::GoalReached => TestParams::GoalReached,
            TestKind::PathLength => TestParams::PathLength(PathParams::default()),
        }
    }

    pub fn kind(&self) -> TestKind {
        match self {
            TestParams::NoCollision => TestKind::NoCollision,
            TestParams::NoStall(_) => TestKind::NoStall,
            TestParams::RightTurnsAtEdges(_) => TestKind::RightTurnsAtEdges,
            TestParams::Smoothness(_) => TestKind::Smoothness,
            TestParams::GoalReached => TestKind::GoalReached,
            TestParams::PathLength(_) => TestKind::PathLength,
        }
    }

    /// Builds params for `kind` from a JSON object; missing keys take defaults.
    pub fn from_value(kind: TestKind, value: Value) -> Result<Self, SpecError> {
        let value = match value {
            Value::Null => Value::Object(Map::new()),
            v => v,
        };
        let bad = |e: serde_json::Error| SpecError(format!("{kind} params: {e}"));
        let params = match kind {
            TestKind::NoCollision | TestKind::GoalReached => {
                if value.as_object().is_some_and(|m| !m.is_empty()) {
                    return Err(SpecError(format!("{kind} takes no params")));
                }
                TestParams::default_for(kind)
            }
            TestKind::NoStall => TestParams::NoStall(serde_json::from_value(value).map_err(bad)?),
            TestKind::RightTurnsAtEdges => TestParams::RightTurnsAtEdges(serde_json::from_value(value).map_err(bad)?),
            TestKind::Smoothness => TestParams::Smoothness(serde_json::from_value(value).map_err(bad)?),
            TestKind::PathLength => TestParams::PathLength(serde_json::from_value(value).map_err(bad)?),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn to_value(&self) -> Value {
        let v = match self {
            TestParams::NoCollision | TestParams::GoalReached => return Value::Object(Map::new()),
            TestParams::NoStall(p) => serde_json::to_value(p),
            TestParams::RightTurnsAtEdges(p) => serde_json::to_value(p),
            TestParams::Smoothness(p) => serde_json::to_value(p),
            TestParams::PathLength(p) => serde_json::to_value(p),
        };
        v.expect("params serialize")
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let pos = |v: f64| v.is_finite() && v > 0.0;
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        let ok = match self {
            TestParams::NoCollision | TestParams::GoalReached => true,
            TestParams::NoStall(p) => p.window_ticks >= 1 && nonneg(p.min_displacement),
            TestParams::RightTurnsAtEdges(p) => pos(p.d_trigger) && nonneg(p.omega_eps),
            TestParams::Smoothness(p) => {
                pos(p.dv_max) && pos(p.domega_max) && p.pass_fraction > 0.0 && p.pass_fraction <= 1.0
            }
            TestParams::PathLength(p) => nonneg(p.tau),
        };
        if ok {
            Ok(())
        } else {
            Err(SpecError(format!("{} params out of range: {}", self.kind(), self.to_value())))
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid test spec: {0}")]
pub struct SpecError(pub String);

/// One behavioral test in an assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct TestSpec {
    pub params: TestParams,
    pub weight: f64,
    pub title: String,
    pub purpose: String,
    pub requirements: String,
    /// Failure hint template; the engine default is used when absent.
    pub hint: Option<String>,
}

impl TestSpec {
    pub fn new(params: TestParams) -> Self {
        let kind = params.kind();
        Self {
            params,
            weight: 1.0,
            title: super::default_title(kind).to_string(),
            purpose: super::default_purpose(kind).to_string(),
            requirements: super::default_requirements(kind).to_string(),
            hint: None,
        }
    }

    pub fn of_kind(kind: TestKind) -> Self {
        Self::new(TestParams::default_for(kind))
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.weight = weight;
        self
    }

    pub fn kind(&self) -> TestKind {
        self.params.kind()
    }

    /// The six checks with default params and unit weights.
    pub fn default_suite() -> Vec<TestSpec> {
        TestKind::ALL.iter().map(|k| TestSpec::of_kind(*k)).collect()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawSpec {
    pub kind: TestKind,
    #[serde(default)]
    pub params: Value,
    #[serde(default = "one")]
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub purpose: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requirements: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hint: Option<String>,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<RawSpec> for TestSpec {
    type Error = SpecError;

    fn try_from(raw: RawSpec) -> Result<Self, SpecError> {
        if !(raw.weight.is_finite() && raw.weight >= 0.0) {
            return Err(SpecError(format!("{} weight must be a non-negative number", raw.kind)));
        }
        let params = TestParams::from_value(raw.kind, raw.params)?;
        let base = TestSpec::new(params);
        Ok(TestSpec {
            params,
            weight: raw.weight,
            title: raw.title.unwrap_or(base.title),
            purpose: raw.purpose.unwrap_or(base.purpose),
            requirements: raw.requirements.unwrap_or(base.requirements),
            hint: raw.hint,
        })
    }
}

impl From<TestSpec> for RawSpec {
    fn from(s: TestSpec) -> Self {
        RawSpec {
            kind: s.kind(),
            params: s.params.to_value(),
            weight: s.weight,
            title: Some(s.title),
            purpose: Some(s.purpose),
            requirements: Some(s.requirements),
            hint: s.hint,
        }
    }
}
