//! Bounded episode execution and the in-memory run-job registry.

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use chrono::Utc;
use serde::Serialize;
use tokio::sync::Semaphore;
use uuid::Uuid;
use virtlab::dsl::Program;
use virtlab::grading::{evaluate_trace_at, AssignmentSpec, Evaluation, GradeReport};
use virtlab::sim::{replay_frames, run_episode_until, Frame, Termination};
use virtlab::testkit::TestResult;

/// Playback never carries more frames than this.
pub const MAX_FRAMES: usize = 2000;

#[derive(Debug, thiserror::Error)]
pub enum ExecError {
    #[error("episode exceeded the {0:?} wall-clock limit")]
    Timeout(Duration),
    #[error("grading failed: {0}")]
    Grade(String),
    #[error("worker crashed: {0}")]
    Crashed(String),
}

/// Runs episodes on the blocking thread pool, at most `workers` at a time,
/// each cancelled after `timeout`.
#[derive(Clone)]
pub struct Pool {
    permits: Arc<Semaphore>,
    timeout: Duration,
}

impl Pool {
    pub fn new(workers: usize, timeout: Duration) -> Self {
        Self {
            permits: Arc::new(Semaphore::new(workers.max(1))),
            timeout,
        }
    }

    pub fn timeout(&self) -> Duration {
        self.timeout
    }

    /// Simulates, tests and grades. `on_start` fires once a worker picks the job up.
    pub async fn evaluate(
        &self,
        assignment: Arc<AssignmentSpec>,
        program: Arc<Program>,
        on_start: impl FnOnce() + Send + 'static,
    ) -> Result<Evaluation, ExecError> {
        let _permit = self.permits.clone().acquire_owned().await.expect("semaphore never closed");
        on_start();
        let cancel = Arc::new(AtomicBool::new(false));
        let flag = cancel.clone();
        let work = tokio::task::spawn_blocking(move || {
            let trace = run_episode_until(&assignment.world, &program, &assignment.sim, || !flag.load(Ordering::Relaxed))?;
            Some(evaluate_trace_at(&assignment, trace, Utc::now()).map_err(|e| ExecError::Grade(e.to_string())))
        });
        match tokio::time::timeout(self.timeout, work).await {
            Ok(Ok(Some(result))) => result,
            Ok(Ok(None)) => Err(ExecError::Timeout(self.timeout)),
            Ok(Err(join)) => Err(ExecError::Crashed(join.to_string())),
            Err(_) => {
                cancel.store(true, Ordering::Relaxed);
                Err(ExecError::Timeout(self.timeout))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Running,
    Done,
    Failed,
}

/// What a finished run returns to the lab view.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub termination: Termination,
    pub ticks: u64,
    pub path_length: f64,
    pub results: Vec<TestResult>,
    pub report: GradeReport,
    pub score_preview: f64,
    pub frame_stride: usize,
    pub frames: Vec<Frame>,
    pub trace_digest: String,
    /// Runs are diagnostic and never stored.
    pub recorded: bool,
}

/// Smallest stride that keeps `n` records within [`MAX_FRAMES`] frames,
/// counting the final record that is always appended.
pub fn frame_stride(n: usize) -> usize {
    if n <= MAX_FRAMES {
        1
    } else {
        (n - 1).div_ceil(MAX_FRAMES - 1)
    }
}

impl RunResult {
    pub fn from_evaluation(e: Evaluation) -> Self {
        let stride = frame_stride(e.trace.records.len());
        Self {
            termination: e.trace.termination,
            ticks: e.trace.last().tick,
            path_length: e.trace.path_length,
            score_preview: e.report.rounded_score(),
            frames: replay_frames(&e.trace, stride),
            frame_stride: stride,
            trace_digest: e.trace.digest(),
            results: e.results,
            report: e.report,
            recorded: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunJob {
    pub id: Uuid,
    pub assignment_id: String,
    pub status: JobStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Arc<RunResult>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip)]
    finished: Option<Instant>,
}

/// Jobs by id; finished jobs are dropped after `retention`.
pub struct JobRegistry {
    jobs: Mutex<HashMap<Uuid, RunJob>>,
    retention: Duration,
}

impl JobRegistry {
    pub fn new(retention: Duration) -> Self {
        Self {
            jobs: Mutex::new(HashMap::new()),
            retention,
        }
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, HashMap<Uuid, RunJob>> {
        self.jobs.lock().unwrap_or_else(|p| p.into_inner())
    }

    pub fn create(&self, assignment_id: &str) -> RunJob {
        let job = RunJob {
            id: Uuid::new_v4(),
            assignment_id: assignment_id.to_string(),
            status: JobStatus::Queued,
            result: None,
            error: None,
            finished: None,
        };
        let mut jobs = self.lock();
        let now = Instant::now();
        jobs.retain(|_, j| j.finished.is_none_or(|t| now.duration_since(t) < self.retention));
        jobs.insert(job.id, job.clone());
        job
    }

    pub fn get(&self, id: Uuid) -> Option<RunJob> {
        let jobs = self.lock();
        jobs.get(&id)
            .filter(|j| j.finished.is_none_or(|t| t.elapsed() < self.retention))
            .cloned()
    }

    pub fn mark_running(&self, id: Uuid) {
        if let Some(j) = self.lock().get_mut(&id) {
            if j.status == JobStatus::Queued {
                j.status = JobStatus::Running;
            }
        }
    }

    pub fn finish(&self, id: Uuid, outcome: Result<RunResult, String>) {
        if let Some(j) = self.lock().get_mut(&id) {
            match outcome {
                Ok(r) => {
                    j.status = JobStatus::Done;
                    j.result = Some(Arc::new(r));
                }
                Err(e) => {
                    j.status = JobStatus::Failed;
                    j.error = Some(e);
                }
            }
            j.finished = Some(Instant::now());
        }
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
