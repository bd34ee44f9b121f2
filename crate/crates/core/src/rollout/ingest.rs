use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use super::parse::{parse_trajectory, ParseError};
use super::{Dialect, Trajectory};

/// One line of a rollout ingest file. Fields not listed here are kept in
/// `extra` and written back unchanged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub question_id: String,
    pub question: String,
    pub dialect: Dialect,
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terminated_cleanly: Option<bool>,
    pub source_model: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling_temperature: Option<f64>,
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl IngestRecord {
    /// Parse the rollout, attaching question metadata. An explicit
    /// `terminated_cleanly` flag overrides the text-based inference.
    pub fn to_trajectory(&self) -> Result<Trajectory, ParseError> {
        let mut traj = parse_trajectory(&self.raw, self.dialect)?;
        traj.question_id = self.question_id.clone();
        traj.question = self.question.clone();
        if let Some(flag) = self.terminated_cleanly {
            traj.terminated_cleanly = flag;
        }
        Ok(traj)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Line { line: usize, message: String },
}

/// Read an ingest file. Blank lines are skipped; line numbers are 1-based.
pub fn read_ingest_file(path: &Path) -> Result<Vec<(usize, IngestRecord)>, IngestError> {
    let io_err = |source| IngestError::Io {
        path: path.display().to_string(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io_err)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io_err)?;
        if line.trim().is_empty() {
            continue;
        }
        let record: IngestRecord = serde_json::from_str(&line).map_err(|e| IngestError::Line {
            line: i + 1,
            message: e.to_string(),
        })?;
        records.push((i + 1, record));
    }
    Ok(records)
}
