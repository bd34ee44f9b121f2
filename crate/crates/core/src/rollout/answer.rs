use serde::{Deserialize, Serialize};

use super::{AnswerBlock, Dialect};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnswerParseError {
    #[error("answer payload is not a JSON object with `answers`: {0}")]
    InvalidJson(String),
    #[error("answer list is empty")]
    NoAnswers,
    #[error("no \\boxed{{...}} expression in answer")]
    MissingBoxed,
    #[error("unbalanced braces in \\boxed expression")]
    UnbalancedBoxed,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstructPayload {
    #[serde(default)]
    rationale: String,
    answers: Vec<String>,
}

const BOXED: &str = "\\boxed{";

/// Strip a leading ```` ``` ```` fence line and, when present, the closing fence.
fn strip_fence(body: &str) -> &str {
    let body = body.trim();
    let Some(after_ticks) = body.strip_prefix("```") else {
        return body;
    };
    let inner = match after_ticks.find('\n') {
        Some(nl) => &after_ticks[nl + 1..],
        None => after_ticks,
    };
    let inner = inner.trim_end();
    inner.strip_suffix("```").unwrap_or(inner)
}

fn parse_instruct(payload: &str) -> Result<AnswerBlock, AnswerParseError> {
    let parsed: InstructPayload =
        serde_json::from_str(strip_fence(payload)).map_err(|e| AnswerParseError::InvalidJson(e.to_string()))?;
    if parsed.answers.is_empty() {
        return Err(AnswerParseError::NoAnswers);
    }
    Ok(AnswerBlock {
        rationale: parsed.rationale,
        answers: parsed.answers,
    })
}

fn parse_base(payload: &str) -> Result<AnswerBlock, AnswerParseError> {
    let start = payload.rfind(BOXED).ok_or(AnswerParseError::MissingBoxed)? + BOXED.len();
    let mut depth = 1usize;
    let mut end = None;
    for (i, c) in payload[start..].char_indices() {
        match c {
            '{' => depth += 1,
            '}' => {
                depth -= 1;
                if depth == 0 {
                    end = Some(start + i);
                    break;
                }
            }
            _ => {}
        }
    }
    let end = end.ok_or(AnswerParseError::UnbalancedBoxed)?;
    let answers: Vec<String> = payload[start..end]
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect();
    if answers.is_empty() {
        return Err(AnswerParseError::NoAnswers);
    }
    Ok(AnswerBlock {
        rationale: String::new(),
        answers,
    })
}

/// Decode the text inside an `<answer>` block.
///
/// Instruct payloads may be fenced or bare JSON; only `rationale` (optional)
/// and `answers` are allowed. Base payloads use the last `\boxed{...}`, split
/// on `;` with each part trimmed and empty parts dropped.
pub fn parse_answer_payload(payload: &str, dialect: Dialect) -> Result<AnswerBlock, AnswerParseError> {
    match dialect {
        Dialect::Instruct => parse_instruct(payload),
        Dialect::Base => parse_base(payload),
    }
}

/// Render an answer block in the layout the dialect's prompt asks for.
pub fn render_answer_payload(block: &AnswerBlock, dialect: Dialect) -> String {
    match dialect {
        Dialect::Instruct => {
            let payload = InstructPayload {
                rationale: block.rationale.clone(),
                answers: block.answers.clone(),
            };
            let json = serde_json::to_string_pretty(&payload).expect("string fields always serialize");
            format!("\n```json\n{json}\n```\n")
        }
        Dialect::Base => format!(" The final answer is \\[ \\boxed{{{}}} \\] ", block.answers.join("; ")),
    }
}
