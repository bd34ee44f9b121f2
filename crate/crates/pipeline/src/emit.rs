use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::group::MinedQuestion;
use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerEntry {
    pub canonical: String,
    pub aliases: Vec<String>,
    pub is_reference: bool,
}

/// One output line. `provenance[i]` lists the trajectories behind
/// `answers[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub question_id: String,
    pub question: String,
    pub answers: Vec<AnswerEntry>,
    pub provenance: Vec<Vec<String>>,
}

impl From<&MinedQuestion> for DatasetRecord {
    fn from(m: &MinedQuestion) -> Self {
        let entry = |k: &altqa_core::metrics::AnswerKey, is_reference| AnswerEntry {
            canonical: k.canonical.clone(),
            aliases: k.aliases.clone(),
            is_reference,
        };
        Self {
            question_id: m.question_id.clone(),
            question: m.question.clone(),
            answers: std::iter::once(entry(&m.reference, true))
                .chain(m.alternatives.iter().map(|k| entry(k, false)))
                .collect(),
            provenance: std::iter::once(m.reference_provenance.clone())
                .chain(m.provenance.iter().cloned())
                .collect(),
        }
    }
}

/// JSON Lines text of the dataset, one record per question sorted by id.
pub fn render_dataset(mined: &[MinedQuestion]) -> Result<String, PipelineError> {
    let mut sorted: Vec<&MinedQuestion> = mined.iter().collect();
    sorted.sort_by(|a, b| a.question_id.cmp(&b.question_id));
    let mut out = String::new();
    for m in sorted {
        m.validate()?;
        out.push_str(&serde_json::to_string(&DatasetRecord::from(m)).expect("records always encode"));
        out.push('\n');
    }
    Ok(out)
}

/// Write the dataset to `path`; returns the number of records.
pub fn emit_dataset(mined: &[MinedQuestion], path: &Path) -> Result<usize, PipelineError> {
    let text = render_dataset(mined)?;
    std::fs::write(path, text).map_err(|source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    })?;
    Ok(mined.len())
}
