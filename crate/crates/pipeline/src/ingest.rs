use std::collections::BTreeMap;
use std::path::Path;

use altqa_core::rollout::{read_ingest_file, IngestError, IngestRecord, Trajectory};

use crate::manifest::{read_manifest, QuestionRecord};
use crate::PipelineError;

#[derive(Debug, Clone, PartialEq)]
pub struct SampledTrajectory {
    pub trajectory_id: String,
    pub line: usize,
    pub record: IngestRecord,
    pub trajectory: Trajectory,
}

impl SampledTrajectory {
    /// The candidate answer of this rollout: its first predicted answer.
    pub fn candidate_answer(&self) -> Option<&str> {
        self.trajectory.answer.as_ref()?.answers.first().map(String::as_str)
    }

    pub fn source_model(&self) -> &str {
        &self.record.source_model
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuestionSamples {
    pub question: QuestionRecord,
    /// Rollouts per source model, each list in input order.
    pub per_model: BTreeMap<String, Vec<SampledTrajectory>>,
}

impl QuestionSamples {
    pub fn len(&self) -> usize {
        self.per_model.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampled rollouts keyed by question id. Every manifest question is
/// present, with no models when nothing was sampled for it.
pub type T1 = BTreeMap<String, QuestionSamples>;

/// Group an ingest file by question and model, joining the manifest.
pub fn ingest_samples(manifest: &BTreeMap<String, QuestionRecord>, path: &Path) -> Result<T1, PipelineError> {
    let file = path.display().to_string();
    let records = read_ingest_file(path).map_err(|e| match e {
        IngestError::Io { source, .. } => PipelineError::Io {
            path: file.clone(),
            source,
        },
        IngestError::Line { line, message } => PipelineError::ParseFailure {
            file: file.clone(),
            line,
            message,
        },
    })?;

    let mut t1: T1 = manifest
        .iter()
        .map(|(id, q)| {
            (
                id.clone(),
                QuestionSamples {
                    question: q.clone(),
                    per_model: BTreeMap::new(),
                },
            )
        })
        .collect();

    for (line, record) in records {
        let Some(entry) = t1.get_mut(&record.question_id) else {
            return Err(PipelineError::UnknownQuestionId {
                file,
                line,
                question_id: record.question_id,
            });
        };
        let trajectory = record.to_trajectory().map_err(|e| PipelineError::ParseFailure {
            file: file.clone(),
            line,
            message: e.to_string(),
        })?;
        let list = entry.per_model.entry(record.source_model.clone()).or_default();
        let trajectory_id = match record.extra.get("trajectory_id").and_then(|v| v.as_str()) {
            Some(id) => id.to_string(),
            None => format!("{}/{}/{}", record.question_id, record.source_model, list.len()),
        };
        list.push(SampledTrajectory {
            trajectory_id,
            line,
            record,
            trajectory,
        });
    }
    Ok(t1)
}

pub fn ingest_with_manifest(manifest: &Path, samples: &Path) -> Result<T1, PipelineError> {
    ingest_samples(&read_manifest(manifest)?, samples)
}
