use serde::{Deserialize, Serialize};

use super::{ActionKind, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Violation {
    NoToolCall,
    NoReasoningBlock,
    MissingOrMultipleAnswer,
    UnparseableAnswer,
    NoTerminator,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormatVerdict {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl FormatVerdict {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            valid: violations.is_empty(),
            violations,
        }
    }

    pub fn valid() -> Self {
        Self::from_violations(Vec::new())
    }
}

/// Structural gate applied before any positive reward.
///
/// A rollout is valid when it has at least one successful tool call (a tool
/// call immediately followed by a non-empty tool response), at least one
/// reasoning block, exactly one answer block that decodes, and it ends
/// cleanly with that answer as the last step.
pub fn check_format_validity(traj: &Trajectory) -> FormatVerdict {
    let mut violations = Vec::new();

    let successful_call = traj.steps.windows(2).any(|w| {
        w[0].kind == ActionKind::ToolCall && w[1].kind == ActionKind::ToolResponse && !w[1].payload.trim().is_empty()
    });
    if !successful_call {
        violations.push(Violation::NoToolCall);
    }

    if traj.count(ActionKind::Reasoning) == 0 {
        violations.push(Violation::NoReasoningBlock);
    }

    let answers = traj.count(ActionKind::Answer);
    if answers != 1 {
        violations.push(Violation::MissingOrMultipleAnswer);
    } else if traj.answer.is_none() {
        violations.push(Violation::UnparseableAnswer);
    }

    let answer_last = traj.steps.last().is_some_and(|s| s.kind == ActionKind::Answer);
    if !traj.terminated_cleanly || (answers > 0 && !answer_last) {
        violations.push(Violation::NoTerminator);
    }

    FormatVerdict::from_violations(violations)
}
