use super::answer::render_answer_payload;
use super::parse::{parse_trajectory, ParseError};
use super::{ActionKind, AnswerBlock, Dialect, ParseWarning, Trajectory};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("trajectory is {actual} but {requested} was requested")]
    DialectMismatch { actual: Dialect, requested: Dialect },
    #[error("trajectory has no steps")]
    EmptyTrajectory,
    #[error("step {index} has a span outside or overlapping the raw text")]
    InvalidSpan { index: usize },
}

/// Re-render a trajectory from its steps, keeping the text between steps.
///
/// Tags are always written in canonical form, so a trajectory parsed with
/// recovered tags comes back with proper closing tags.
pub fn serialize_trajectory(traj: &Trajectory, dialect: Dialect) -> Result<String, SerializeError> {
    if traj.dialect != dialect {
        return Err(SerializeError::DialectMismatch {
            actual: traj.dialect,
            requested: dialect,
        });
    }
    if traj.steps.is_empty() {
        return Err(SerializeError::EmptyTrajectory);
    }

    let raw = &traj.raw;
    let mut out = String::with_capacity(raw.len());
    let mut cursor = 0;
    for (index, step) in traj.steps.iter().enumerate() {
        let span = step.span;
        if span.start < cursor
            || span.end > raw.len()
            || !raw.is_char_boundary(span.start)
            || !raw.is_char_boundary(span.end)
        {
            return Err(SerializeError::InvalidSpan { index });
        }
        out.push_str(&raw[cursor..span.start]);
        out.push_str(&dialect.open_tag(step.kind));
        out.push_str(&step.payload);
        out.push_str(&dialect.close_tag(step.kind));
        cursor = span.end;
    }
    out.push_str(&raw[cursor..]);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BuildError {
    #[error("assembled text does not parse: {0}")]
    Parse(#[from] ParseError),
    #[error("payload or separator text contains markup that changes the step structure")]
    AmbiguousMarkup,
    #[error("base-dialect answer block cannot carry {0}")]
    UnrepresentableAnswer(&'static str),
}

/// Assembles a well-formed rollout from steps and separator text.
///
/// `build` parses the assembled text back and refuses any input whose
/// payloads or separators would be read differently, so every built
/// trajectory is a fixed point of parse and serialize.
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder {
    dialect: Dialect,
    raw: String,
    expected: Vec<(ActionKind, String)>,
    question_id: String,
    question: String,
    base_answer_error: Option<&'static str>,
}

impl TrajectoryBuilder {
    pub fn new(dialect: Dialect) -> Self {
        Self {
            dialect,
            raw: String::new(),
            expected: Vec::new(),
            question_id: String::new(),
            question: String::new(),
            base_answer_error: None,
        }
    }

    pub fn question(mut self, id: impl Into<String>, text: impl Into<String>) -> Self {
        self.question_id = id.into();
        self.question = text.into();
        self
    }

    /// Free text between steps (chat markers, newlines).
    pub fn text(mut self, text: &str) -> Self {
        self.raw.push_str(text);
        self
    }

    pub fn step(mut self, kind: ActionKind, payload: &str) -> Self {
        self.raw.push_str(&self.dialect.open_tag(kind));
        self.raw.push_str(payload);
        self.raw.push_str(&self.dialect.close_tag(kind));
        self.expected.push((kind, payload.to_string()));
        self
    }

    pub fn reasoning(self, payload: &str) -> Self {
        self.step(ActionKind::Reasoning, payload)
    }

    pub fn tool_call(self, payload: &str) -> Self {
        self.step(ActionKind::ToolCall, payload)
    }

    pub fn tool_response(self, payload: &str) -> Self {
        self.step(ActionKind::ToolResponse, payload)
    }

    pub fn answer(mut self, block: &AnswerBlock) -> Self {
        if self.dialect == Dialect::Base {
            if !block.rationale.is_empty() {
                self.base_answer_error = Some("a rationale");
            } else if block
                .answers
                .iter()
                .any(|a| a.is_empty() || a.trim() != a || a.contains([';', '{', '}']))
            {
                self.base_answer_error = Some("empty, padded, or delimiter-bearing answers");
            }
        }
        let payload = render_answer_payload(block, self.dialect);
        self.step(ActionKind::Answer, &payload)
    }

    pub fn build(self) -> Result<Trajectory, BuildError> {
        if let Some(what) = self.base_answer_error {
            return Err(BuildError::UnrepresentableAnswer(what));
        }
        let mut traj = parse_trajectory(&self.raw, self.dialect)?;
        let same_shape = traj.steps.len() == self.expected.len()
            && traj
                .steps
                .iter()
                .zip(&self.expected)
                .all(|(s, (kind, payload))| s.kind == *kind && &s.payload == payload);
        let recovered = traj.warnings.iter().any(|w| {
            matches!(
                w,
                ParseWarning::ReopenedAsClose { .. } | ParseWarning::UnterminatedCloseTag { .. }
            )
        });
        if !same_shape || recovered {
            return Err(BuildError::AmbiguousMarkup);
        }
        traj.question_id = self.question_id;
        traj.question = self.question;
        Ok(traj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn four_step(dialect: Dialect) -> Trajectory {
        TrajectoryBuilder::new(dialect)
            .text("<|im_start|>assistant\n")
            .reasoning("first, find the hormone")
            .text("\n\n")
            .tool_call("primary male hormone")
            .text("\n")
            .tool_response("Testosterone\nTestosterone is the primary male sex hormone")
            .text("\n")
            .answer(&AnswerBlock::new("", ["cholesterol", "Androstenedione"]))
            .build()
            .unwrap()
    }

    #[test]
    fn round_trip_four_steps() {
        for dialect in Dialect::ALL {
            let t = four_step(dialect);
            let text = serialize_trajectory(&t, dialect).unwrap();
            assert_eq!(text, t.raw);
            assert_eq!(parse_trajectory(&text, dialect).unwrap(), t);
        }
    }

    #[test]
    fn base_serialization_uses_semicolons() {
        let t = TrajectoryBuilder::new(Dialect::Base)
            .answer(&AnswerBlock::new("", ["a", "b"]))
            .build()
            .unwrap();
        assert!(serialize_trajectory(&t, Dialect::Base).unwrap().contains("\\boxed{a; b}"));
    }

    #[test]
    fn dialect_mismatch_and_empty() {
        let t = four_step(Dialect::Instruct);
        assert!(matches!(
            serialize_trajectory(&t, Dialect::Base),
            Err(SerializeError::DialectMismatch { .. })
        ));
        let empty = Trajectory { steps: vec![], ..t };
        assert_eq!(serialize_trajectory(&empty, Dialect::Instruct), Err(SerializeError::EmptyTrajectory));
    }

    #[test]
    fn recovered_tags_are_canonicalised() {
        let raw = "<think>a</think\n<tool_call>q</tool_call>";
        let t = parse_trajectory(raw, Dialect::Instruct).unwrap();
        assert_eq!(
            serialize_trajectory(&t, Dialect::Instruct).unwrap(),
            "<think>a</think>\n<tool_call>q</tool_call>"
        );
    }

    #[test]
    fn builder_rejects_markup_in_payloads() {
        // other kinds' tags inside a block are plain text and survive
        let t = TrajectoryBuilder::new(Dialect::Instruct)
            .reasoning("see <tool_call>x</tool_call>")
            .build()
            .unwrap();
        assert_eq!(t.steps.len(), 1);
        let err = TrajectoryBuilder::new(Dialect::Instruct)
            .reasoning("early </think> close")
            .build()
            .unwrap_err();
        assert!(matches!(err, BuildError::Parse(ParseError::UnbalancedTags { .. })));
        let err = TrajectoryBuilder::new(Dialect::Instruct)
            .text("<think>")
            .reasoning("x")
            .build()
            .unwrap_err();
        assert!(matches!(err, BuildError::AmbiguousMarkup | BuildError::Parse(_)));
        let err = TrajectoryBuilder::new(Dialect::Base)
            .answer(&AnswerBlock::new("", ["a;b"]))
            .build()
            .unwrap_err();
        assert!(matches!(err, BuildError::UnrepresentableAnswer(_)));
    }
}
