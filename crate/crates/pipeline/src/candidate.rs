use altqa_judge::EvidenceLabel;
use serde::{Deserialize, Serialize};

/// Furthest stage a candidate reached: T2 membership is `Filtered`, T3 is
/// `Verified`, and `Grouped` once placed in an answer key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Sampled,
    Filtered,
    Verified,
    Grouped,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    /// A judge call for this candidate failed after retries.
    JudgeError,
    /// The answer normalizes to nothing and cannot be matched.
    EmptyAnswer,
}

/// One verifier's vote. `label` is `None` when the call failed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vote {
    pub verifier: usize,
    pub label: Option<EvidenceLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Vote {
    pub fn supports(&self) -> bool {
        self.label == Some(EvidenceLabel::Supported)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub question_id: String,
    pub trajectory_id: String,
    /// 1-based line in the ingest file; fixes the stable input order.
    pub line: usize,
    pub source_model: String,
    pub answer: String,
    pub stage: Stage,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub votes: Option<Vec<Vote>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<Flag>,
}

impl CandidateRecord {
    pub fn supported_votes(&self) -> usize {
        self.votes.as_ref().map_or(0, |v| v.iter().filter(|v| v.supports()).count())
    }

    pub(crate) fn flag(&mut self, flag: Flag) {
        if !self.flags.contains(&flag) {
            self.flags.push(flag);
        }
    }
}
