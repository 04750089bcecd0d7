//! Assignment files: a world file plus `[assignment]`, `[[test]]`,
//! `[grading]` and `[sim]` sections.
//!
//! ```toml
//! [assignment]
//! id = "w1-square"
//! title = "Around the square"
//! starter_code = "starter.rbt"
//!
//! [grading]
//! tau = 0.2
//!
//! [[test]]
//! kind = "no_collision"
//! weight = 2
//! hint = "Hit at tick {tick} near ({x}, {y})."
//! ```
//!
//! Without `[[test]]` blocks the six default checks are used. Keys in
//! `[grading]` override the default params of every test that takes them;
//! a test's own `params` win over both.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::template::{check_template, default_hint};
use crate::reference::{bug_reference_path, ReferencePath};
use crate::sim::SimConfig;
use crate::testkit::{TestKind, TestParams, TestSpec};
use crate::world::{WorldError, WorldFile, WorldSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssignmentError {
    #[error("{0}")]
    World(#[from] WorldError),
    #[error("invalid assignment: {0}")]
    Invalid(String),
    #[error("cannot read starter code {path}: {message}")]
    Starter { path: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentSpec {
    pub id: String,
    pub title: String,
    #[serde(default)]
    pub description: String,
    pub starter_code: String,
    pub world: WorldSpec,
    pub tests: Vec<TestSpec>,
    pub sim: SimConfig,
    /// Bug reference for the world, when one exists.
    pub reference: Option<ReferencePath>,
}

#[derive(Deserialize)]
struct AssignmentFile {
    #[serde(flatten)]
    world: WorldFile,
    assignment: Header,
    #[serde(default, rename = "test")]
    tests: Vec<Value>,
    #[serde(default)]
    grading: Map<String, Value>,
    #[serde(default)]
    sim: Option<SimConfig>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    id: String,
    title: String,
    #[serde(default)]
    description: String,
    /// Path relative to the assignment file.
    #[serde(default)]
    starter_code: Option<String>,
    /// Inline starter source; used when no path is given.
    #[serde(default)]
    starter_source: Option<String>,
}

impl AssignmentSpec {
    /// Parses an assignment; `read_starter` resolves the `starter_code` path.
    pub fn parse(
        text: &str,
        read_starter: impl Fn(&str) -> std::io::Result<String>,
    ) -> Result<Self, AssignmentError> {
        let file: AssignmentFile = toml::from_str(text).map_err(|e| WorldError::from_toml(&e, text))?;
        let invalid = |m: String| AssignmentError::Invalid(m);
        let header = file.assignment;
        if header.id.is_empty() || !header.id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
            return Err(invalid(format!("id {:?} must be non-empty ASCII letters, digits, '-' or '_'", header.id)));
        }
        let starter_code = match (header.starter_code, header.starter_source) {
            (Some(path), _) => read_starter(&path).map_err(|e| AssignmentError::Starter {
                path,
                message: e.to_string(),
            })?,
            (None, Some(src)) => src,
            (None, None) => String::new(),
        };
        let world = WorldSpec::try_from(file.world)?;
        let sim = file.sim.unwrap_or_default();
        sim.validate().map_err(|e| invalid(e.to_string()))?;

        let tests = if file.tests.is_empty() {
            TestKind::ALL
                .iter()
                .map(|k| build_test(Value::Object(Map::from_iter([("kind".into(), Value::String(k.name().into()))])), &file.grading))
                .collect::<Result<Vec<_>, _>>()?
        } else {
            file.tests
                .into_iter()
                .map(|t| build_test(t, &file.grading))
                .collect::<Result<Vec<_>, _>>()?
        };
        for key in file.grading.keys() {
            if !TestKind::ALL
                .iter()
                .any(|k| TestParams::default_for(*k).to_value().get(key).is_some())
            {
                return Err(invalid(format!("unknown [grading] key {key:?}")));
            }
        }
        for t in &tests {
            if let Some(h) = &t.hint {
                check_template(h).map_err(|e| invalid(format!("{} hint: {e}", t.kind())))?;
            }
        }

        let reference = bug_reference_path(&world).ok();
        if reference.is_none() && tests.iter().any(|t| t.kind() == TestKind::PathLength) {
            let why = bug_reference_path(&world).unwrap_err();
            return Err(invalid(format!("path_length test needs a Bug reference: {why}")));
        }
        Ok(AssignmentSpec {
            id: header.id,
            title: header.title,
            description: header.description,
            starter_code,
            world,
            tests,
            sim,
            reference,
        })
    }

    /// Loads a file, resolving the starter code next to it.
    pub fn load(path: &Path) -> Result<Self, AssignmentError> {
        let text = std::fs::read_to_string(path).map_err(|e| AssignmentError::Invalid(format!("{}: {e}", path.display())))?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Self::parse(&text, |rel| std::fs::read_to_string(dir.join(rel)))
    }

    /// The hint template for test `index`, falling back to the engine default.
    pub fn hint_template(&self, index: usize) -> &str {
        let t = &self.tests[index];
        t.hint.as_deref().unwrap_or_else(|| default_hint(t.kind()))
    }
}

fn build_test(raw: Value, grading: &Map<String, Value>) -> Result<TestSpec, AssignmentError> {
    let Value::Object(mut obj) = raw else {
        return Err(AssignmentError::Invalid("[[test]] must be a table".into()));
    };
    let kind: TestKind = obj
        .get("kind")
        .cloned()
        .ok_or_else(|| AssignmentError::Invalid("[[test]] needs a kind".into()))
        .and_then(|k| serde_json::from_value(k).map_err(|e| AssignmentError::Invalid(format!("test kind: {e}"))))?;
    let defaults = TestParams::default_for(kind).to_value();
    let mut params: Map<String, Value> = grading
        .iter()
        .filter(|(k, _)| defaults.get(k.as_str()).is_some())
        .map(|(k, v)| (k.clone(), v.clone()))
        .collect();
    match obj.remove("params") {
        Some(Value::Object(own)) => params.extend(own),
        Some(other) => return Err(AssignmentError::Invalid(format!("{kind} params must be a table, got {other}"))),
        None => {}
    }
    obj.insert("params".into(), Value::Object(params));
    serde_json::from_value(Value::Object(obj)).map_err(|e| AssignmentError::Invalid(e.to_string()))
}
