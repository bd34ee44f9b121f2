use std::collections::VecDeque;
use std::sync::Mutex;

use altqa_core::metrics::normalize_answer;
use altqa_core::rollout::{parse_trajectory, ActionKind, Dialect};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::gateway::{ChatBackend, ChatRequest, JudgeInput, TransportError};
use crate::verdict::EvidenceLabel;

/// Rule-based offline judge. Test-only semantics; it makes no attempt to
/// approximate a real judge.
///
/// * equivalence: correct iff the prediction normalizes equal to a gold answer;
/// * evidence: supported iff the normalized answer occurs as a whole-word
///   substring of some tool response, partially supported iff it occurs
///   only in reasoning, not supported otherwise;
/// * grouping: answers with equal normalization share a group, in order of
///   first appearance.
///
/// With a demotion rate, a stable hash of `(seed, question, answer)` turns
/// that fraction of supported verdicts into partially supported, so
/// differently seeded mocks disagree the way independent verifiers do.
#[derive(Debug, Clone, Default)]
pub struct MockBackend {
    seed: u64,
    demotion_rate: f64,
    unavailable: bool,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_demotion(seed: u64, rate: f64) -> Self {
        Self {
            seed,
            demotion_rate: rate.clamp(0.0, 1.0),
            unavailable: false,
        }
    }

    /// A backend whose every call fails at the transport level.
    pub fn unavailable() -> Self {
        Self {
            unavailable: true,
            ..Self::default()
        }
    }

    fn demoted(&self, question: &str, answer: &str) -> bool {
        if self.demotion_rate <= 0.0 {
            return false;
        }
        let mut h = Sha256::new();
        h.update(self.seed.to_le_bytes());
        h.update(question.as_bytes());
        h.update([0]);
        h.update(answer.as_bytes());
        let digest = h.finalize();
        let head = u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"));
        (head as f64 / u64::MAX as f64) < self.demotion_rate
    }
}

fn contains_phrase(haystack: &str, needle: &str) -> bool {
    format!(" {} ", normalize_answer(haystack)).contains(&format!(" {needle} "))
}

/// Evidence label from the rollout's tagged blocks.
pub(crate) fn evidence_label(rollout_text: &str, answer: &str) -> EvidenceLabel {
    let needle = normalize_answer(answer);
    if needle.is_empty() {
        return EvidenceLabel::NotSupported;
    }
    let Some(traj) = Dialect::ALL
        .into_iter()
        .filter_map(|d| parse_trajectory(rollout_text, d).ok())
        .max_by_key(|t| t.steps.len())
    else {
        return EvidenceLabel::NotSupported;
    };
    let found_in = |kind| traj.steps_of(kind).any(|s| contains_phrase(&s.payload, &needle));
    if found_in(ActionKind::ToolResponse) {
        EvidenceLabel::Supported
    } else if found_in(ActionKind::Reasoning) {
        EvidenceLabel::PartiallySupported
    } else {
        EvidenceLabel::NotSupported
    }
}

fn group_by_normalization(answers: &[String]) -> Vec<Vec<String>> {
    let mut groups: Vec<(String, Vec<String>)> = Vec::new();
    for a in answers {
        let key = normalize_answer(a);
        match groups.iter_mut().find(|(k, _)| !k.is_empty() && *k == key) {
            Some((_, g)) => g.push(a.clone()),
            None => groups.push((key, vec![a.clone()])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

fn fenced(value: serde_json::Value) -> String {
    format!("```json\n{}\n```", serde_json::to_string_pretty(&value).expect("json values encode"))
}

impl ChatBackend for MockBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        if self.unavailable {
            return Err(TransportError("mock backend unavailable".into()));
        }
        let reply = match *request.input {
            JudgeInput::Equivalence { gold, prediction, .. } => {
                let p = normalize_answer(prediction);
                let hit = !p.is_empty() && gold.iter().any(|g| normalize_answer(g) == p);
                json!({
                    "rationale": if hit { "normalized forms are equal" } else { "no gold answer has the same normalized form" },
                    "judgement": if hit { "correct" } else { "incorrect" },
                })
            }
            JudgeInput::Evidence {
                question,
                rollout_text,
                answer,
            } => {
                let mut label = evidence_label(rollout_text, answer);
                if label == EvidenceLabel::Supported && self.demoted(question, answer) {
                    label = EvidenceLabel::PartiallySupported;
                }
                json!({
                    "verdict": label.wire(),
                    "claims_analysis": [{ "claim": answer, "status": label.wire(), "evidence": [] }],
                })
            }
            JudgeInput::Grouping { answers } => json!(group_by_normalization(answers)),
        };
        Ok(fenced(reply))
    }
}

/// Replays a fixed sequence of replies, then fails. Records every prompt.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    script: Mutex<VecDeque<Result<String, TransportError>>>,
    prompts: Mutex<Vec<String>>,
}

impl ScriptedBackend {
    pub fn new(script: impl IntoIterator<Item = Result<String, TransportError>>) -> Self {
        Self {
            script: Mutex::new(script.into_iter().collect()),
            prompts: Mutex::new(Vec::new()),
        }
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().unwrap_or_else(|e| e.into_inner()).clone()
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        self.prompts
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .push(request.prompt.to_string());
        self.script
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .pop_front()
            .unwrap_or_else(|| Err(TransportError("script exhausted".into())))
    }
}
