//! HTTP service and command-line front end for the virtual lab.
//!
//! [`App::new`] builds the shared state from an assignments directory and a
//! data directory; [`App::router`] exposes it as an axum router, and
//! [`cli::main`] is what the `virtlab` binary runs.

pub mod api;
pub mod cli;
pub mod jobs;
pub mod store;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use axum::Router;
use virtlab::grading::AssignmentSpec;

use crate::api::AppState;
use crate::jobs::{JobRegistry, Pool};
use crate::store::{FileStore, SubmissionStore};

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub assignments_dir: PathBuf,
    pub data_dir: PathBuf,
    /// Episodes simulated at once.
    pub workers: usize,
    /// Wall-clock cap per episode.
    pub run_timeout: Duration,
    /// How long finished run jobs stay queryable.
    pub job_retention: Duration,
}

impl ServiceConfig {
    pub fn new(assignments_dir: impl Into<PathBuf>, data_dir: impl Into<PathBuf>) -> Self {
        Self {
            assignments_dir: assignments_dir.into(),
            data_dir: data_dir.into(),
            workers: std::thread::available_parallelism().map_or(2, |n| n.get()),
            run_timeout: Duration::from_secs(10),
            job_retention: Duration::from_secs(3600),
        }
    }
}

/// Loads every `*.toml` in `dir`, in file-name order. Files that fail to
/// load and repeated ids are logged and skipped.
pub fn load_assignments_dir(dir: &Path) -> std::io::Result<BTreeMap<String, Arc<AssignmentSpec>>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    let mut out = BTreeMap::new();
    for path in files {
        match AssignmentSpec::load(&path) {
            Ok(a) if out.contains_key(&a.id) => {
                tracing::warn!(file = %path.display(), id = %a.id, "duplicate assignment id; skipped");
            }
            Ok(a) => {
                tracing::info!(file = %path.display(), id = %a.id, "loaded assignment");
                out.insert(a.id.clone(), Arc::new(a));
            }
            Err(e) => tracing::warn!(file = %path.display(), "skipping assignment: {e}"),
        }
    }
    Ok(out)
}

pub struct App {
    state: AppState,
}

impl App {
    pub fn new(config: &ServiceConfig) -> std::io::Result<Self> {
        let assignments = load_assignments_dir(&config.assignments_dir)?;
        Ok(Self::with_store(
            assignments,
            Arc::new(FileStore::new(&config.data_dir)),
            config,
        ))
    }

    pub fn with_store(
        assignments: BTreeMap<String, Arc<AssignmentSpec>>,
        store: Arc<dyn SubmissionStore>,
        config: &ServiceConfig,
    ) -> Self {
        Self {
            state: AppState {
                assignments: Arc::new(assignments),
                jobs: Arc::new(JobRegistry::new(config.job_retention)),
                pool: Pool::new(config.workers, config.run_timeout),
                store,
            },
        }
    }

    pub fn assignment_ids(&self) -> impl Iterator<Item = &str> {
        self.state.assignments.keys().map(String::as_str)
    }

    pub fn router(&self) -> Router {
        api::router(self.state.clone())
    }
}
