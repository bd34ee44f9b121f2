//! Search-agent rollouts: parsing, validation, serialization and loss masking.
//!
//! Two text dialects are understood:
//!
//! * `instruct`: `<think>`, `<tool_call>`, `<tool_response>` and `<answer>` blocks,
//!   with the answer carried as a (usually fenced) JSON object holding
//!   `rationale` and `answers`.
//! * `base`: `<think>`, `<search>`, `<result>` and `<answer>` blocks, with the
//!   answers inside `\boxed{...}` separated by semicolons.
//!
//! Spans are byte offsets into [`Trajectory::raw`] and always fall on UTF-8
//! character boundaries. [`Span::to_char_range`] converts them to Unicode
//! scalar offsets when a consumer needs character positions.

mod answer;
mod format;
mod ingest;
mod mask;
mod parse;
mod serialize;

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use answer::{parse_answer_payload, render_answer_payload, AnswerParseError};
pub use format::{check_format_validity, FormatVerdict, Violation};
pub use ingest::{read_ingest_file, IngestError, IngestRecord};
pub use mask::{char_mask_spans, compute_loss_mask_spans};
pub use parse::{parse_trajectory, ParseError};
pub use serialize::{serialize_trajectory, BuildError, SerializeError, TrajectoryBuilder};

/// Instructed answer lists longer than this are accepted but flagged.
pub const MAX_SUGGESTED_ANSWERS: usize = 3;

/// Text markers accepted as an end-of-sequence signal after the final answer.
pub const EOS_MARKERS: &[&str] = &["<|im_end|>", "<|endoftext|>", "</s>"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dialect {
    Instruct,
    Base,
}

impl Dialect {
    pub const ALL: [Dialect; 2] = [Dialect::Instruct, Dialect::Base];

    /// Tag name used for `kind` in this dialect.
    pub fn tag(self, kind: ActionKind) -> &'static str {
        match (self, kind) {
            (_, ActionKind::Reasoning) => "think",
            (_, ActionKind::Answer) => "answer",
            (Dialect::Instruct, ActionKind::ToolCall) => "tool_call",
            (Dialect::Instruct, ActionKind::ToolResponse) => "tool_response",
            (Dialect::Base, ActionKind::ToolCall) => "search",
            (Dialect::Base, ActionKind::ToolResponse) => "result",
        }
    }

    pub fn open_tag(self, kind: ActionKind) -> String {
        format!("<{}>", self.tag(kind))
    }

    pub fn close_tag(self, kind: ActionKind) -> String {
        format!("</{}>", self.tag(kind))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Dialect::Instruct => "instruct",
            Dialect::Base => "base",
        }
    }
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dialect {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "instruct" => Ok(Dialect::Instruct),
            "base" => Ok(Dialect::Base),
            _ => Err(ParseError::UnknownDialect(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionKind {
    Reasoning,
    ToolCall,
    ToolResponse,
    Answer,
}

impl ActionKind {
    pub const ALL: [ActionKind; 4] = [
        ActionKind::Reasoning,
        ActionKind::ToolCall,
        ActionKind::ToolResponse,
        ActionKind::Answer,
    ];
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ActionKind::Reasoning => "reasoning",
            ActionKind::ToolCall => "tool_call",
            ActionKind::ToolResponse => "tool_response",
            ActionKind::Answer => "answer",
        };
        f.write_str(s)
    }
}

/// Half-open byte interval `[start, end)` into a rollout's raw text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    /// The same interval expressed in Unicode scalar values of `text`.
    pub fn to_char_range(&self, text: &str) -> Range<usize> {
        let start = text[..self.start].chars().count();
        let len = text[self.start..self.end].chars().count();
        start..start + len
    }
}

/// One tagged region of a rollout. `payload` is the text between the tags;
/// `span` covers the tags themselves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionStep {
    pub kind: ActionKind,
    pub payload: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerBlock {
    /// Empty for the base dialect, which has no structured rationale.
    pub rationale: String,
    pub answers: Vec<String>,
}

impl AnswerBlock {
    pub fn new<S: Into<String>>(rationale: impl Into<String>, answers: impl IntoIterator<Item = S>) -> Self {
        Self {
            rationale: rationale.into(),
            answers: answers.into_iter().map(Into::into).collect(),
        }
    }
}

/// Non-fatal irregularities noticed while parsing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "warning", rename_all = "snake_case")]
pub enum ParseWarning {
    /// A block was closed by a repeated opening tag (`<think>…<think>`).
    ReopenedAsClose { kind: ActionKind, offset: usize },
    /// A closing tag was missing its `>` (`</think` followed by other text).
    UnterminatedCloseTag { kind: ActionKind, offset: usize },
    /// More answers than the prompt asks for.
    TooManyAnswers { count: usize },
    /// The final answer block could not be decoded.
    UnparseableAnswer { reason: String },
}

/// A parsed rollout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub question_id: String,
    pub question: String,
    pub dialect: Dialect,
    pub raw: String,
    pub steps: Vec<ActionStep>,
    pub terminated_cleanly: bool,
    /// Decoded payload of the last answer step, when it decodes.
    pub answer: Option<AnswerBlock>,
    pub warnings: Vec<ParseWarning>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("trajectory has no parseable answer block")]
    NoAnswerBlock,
}

impl Trajectory {
    pub fn steps_of(&self, kind: ActionKind) -> impl Iterator<Item = &ActionStep> {
        self.steps.iter().filter(move |s| s.kind == kind)
    }

    pub fn count(&self, kind: ActionKind) -> usize {
        self.steps_of(kind).count()
    }

    pub fn tool_call_count(&self) -> usize {
        self.count(ActionKind::ToolCall)
    }

    /// Text between the end of the previous step (or the start) and `index`.
    pub fn gap_before(&self, index: usize) -> &str {
        let start = if index == 0 { 0 } else { self.steps[index - 1].span.end };
        let end = self.steps.get(index).map_or(self.raw.len(), |s| s.span.start);
        &self.raw[start..end]
    }

    /// Text after the last step.
    pub fn trailing_text(&self) -> &str {
        let start = self.steps.last().map_or(0, |s| s.span.end);
        &self.raw[start..]
    }

    /// Search query of a tool-call step. Instruct calls carry a JSON object
    /// whose `arguments.query` is returned; base calls are the query itself.
    pub fn query_of(&self, step: &ActionStep) -> Option<String> {
        if step.kind != ActionKind::ToolCall {
            return None;
        }
        match self.dialect {
            Dialect::Base => Some(step.payload.trim().to_string()),
            Dialect::Instruct => {
                let value: serde_json::Value = serde_json::from_str(step.payload.trim()).ok()?;
                value
                    .get("arguments")
                    .and_then(|a| a.get("query"))
                    .and_then(|q| q.as_str())
                    .map(str::to_string)
            }
        }
    }
}

/// Answers of the trajectory's answer block, verbatim and in order.
pub fn extract_answers(traj: &Trajectory) -> Result<Vec<String>, ExtractError> {
    traj.answer
        .as_ref()
        .map(|block| block.answers.clone())
        .ok_or(ExtractError::NoAnswerBlock)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dialect_from_str() {
        assert_eq!("instruct".parse::<Dialect>().unwrap(), Dialect::Instruct);
        assert_eq!(" BASE ".parse::<Dialect>().unwrap(), Dialect::Base);
        assert!(matches!("chat".parse::<Dialect>(), Err(ParseError::UnknownDialect(_))));
    }

    #[test]
    fn span_char_range() {
        let text = "héllo <b>wörld</b>";
        let start = text.find("<b>").unwrap();
        let span = Span::new(start, text.len());
        assert_eq!(span.to_char_range(text), 6..18);
    }

    #[test]
    fn extract_answers_cases() {
        let traj = TrajectoryBuilder::new(Dialect::Instruct)
            .reasoning("r")
            .tool_call("q")
            .tool_response("o")
            .answer(&AnswerBlock::new("", ["cholesterol", "Androstenedione"]))
            .build()
            .unwrap();
        assert_eq!(extract_answers(&traj).unwrap(), vec!["cholesterol", "Androstenedione"]);

        let single = TrajectoryBuilder::new(Dialect::Base)
            .answer(&AnswerBlock::new("", ["x"]))
            .build()
            .unwrap();
        assert_eq!(extract_answers(&single).unwrap(), vec!["x"]);

        let none = TrajectoryBuilder::new(Dialect::Instruct).reasoning("r").build().unwrap();
        assert_eq!(extract_answers(&none), Err(ExtractError::NoAnswerBlock));
    }

    #[test]
    fn instruct_query_extraction() {
        let traj = TrajectoryBuilder::new(Dialect::Instruct)
            .tool_call(r#"{"name": "wikipedia_search", "arguments": {"query": "primary male hormone"}}"#)
            .build()
            .unwrap();
        assert_eq!(traj.query_of(&traj.steps[0]).as_deref(), Some("primary male hormone"));
    }
}
