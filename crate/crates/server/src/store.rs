//! Submission persistence: one append-only NDJSON file per assignment.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use uuid::Uuid;
use virtlab::grading::GradeReport;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Submission {
    pub id: Uuid,
    pub assignment_id: String,
    pub source: String,
    pub created_at: DateTime<Utc>,
    pub report: GradeReport,
    pub trace_digest: String,
}

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("submission store unavailable: {0}")]
    Unavailable(#[from] std::io::Error),
}

pub trait SubmissionStore: Send + Sync {
    /// Persists `sub`; returns only once it is durable.
    fn append(&self, sub: &Submission) -> Result<(), StoreError>;
    /// Submissions for one assignment, newest first.
    fn list(&self, assignment_id: &str) -> Result<Vec<Submission>, StoreError>;
}

/// `<dir>/<assignment_id>.ndjson`, written by a single writer.
pub struct FileStore {
    dir: PathBuf,
    writer: Mutex<()>,
}

impl FileStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            writer: Mutex::new(()),
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, assignment_id: &str) -> PathBuf {
        self.dir.join(format!("{assignment_id}.ndjson"))
    }
}

impl SubmissionStore for FileStore {
    fn append(&self, sub: &Submission) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(sub).map_err(std::io::Error::other)?;
        line.push(b'\n');
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        fs::create_dir_all(&self.dir)?;
        let mut file = OpenOptions::new().create(true).append(true).open(self.path(&sub.assignment_id))?;
        let before = file.metadata()?.len();
        let written = file.write_all(&line).and_then(|_| file.sync_data());
        if let Err(e) = written {
            // drop a torn line so the file stays one record per line
            let _ = file.set_len(before);
            return Err(e.into());
        }
        Ok(())
    }

    fn list(&self, assignment_id: &str) -> Result<Vec<Submission>, StoreError> {
        let file = match File::open(self.path(assignment_id)) {
            Ok(f) => f,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
            Err(e) => return Err(e.into()),
        };
        let mut out = Vec::new();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<Submission>(&line) {
                Ok(s) => out.push(s),
                Err(e) => tracing::warn!(assignment = assignment_id, line = n + 1, "skipping unreadable submission: {e}"),
            }
        }
        // file order is append order; a stable sort keeps later appends first among equal timestamps
        out.reverse();
        out.sort_by_key(|s| std::cmp::Reverse(s.created_at));
        Ok(out)
    }
}
