use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use altqa_core::metrics::AnswerKey;
use serde::{Deserialize, Serialize};

use crate::PipelineError;

/// One line of the question manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub question_id: String,
    pub question: String,
    pub reference: AnswerKey,
    #[serde(default)]
    pub source_dataset: String,
}

pub fn read_manifest(path: &Path) -> Result<BTreeMap<String, QuestionRecord>, PipelineError> {
    let file_name = path.display().to_string();
    let io = |source| PipelineError::Io {
        path: file_name.clone(),
        source,
    };
    let reader = BufReader::new(File::open(path).map_err(io)?);
    let mut out = BTreeMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| PipelineError::ParseFailure {
            file: file_name.clone(),
            line: i + 1,
            message,
        };
        let mut record: QuestionRecord = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        record.reference = record.reference.validated().map_err(|e| fail(e.to_string()))?;
        if out.contains_key(&record.question_id) {
            return Err(PipelineError::DuplicateQuestion(record.question_id));
        }
        out.insert(record.question_id.clone(), record);
    }
    Ok(out)
}
