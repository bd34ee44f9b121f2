//! Prompt templates for each judge role, rendered with `{name}`
//! placeholders. `{{` and `}}` stand for literal braces.

use std::collections::HashMap;

pub const PROMPT_VERSION: &str = "v1";

pub const EQUIVALENCE_TEMPLATE: &str = include_str!("../assets/equivalence.v1.txt");
pub const EVIDENCE_TEMPLATE: &str = include_str!("../assets/evidence.v1.txt");
pub const GROUPING_TEMPLATE: &str = include_str!("../assets/grouping.v1.txt");

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("no value for placeholder {{{0}}}")]
    MissingValue(String),
    #[error("unbalanced brace at byte {0}")]
    UnbalancedBrace(usize),
}

pub fn render(template: &str, values: &HashMap<&str, String>) -> Result<String, RenderError> {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    let mut offset = 0;
    while let Some(i) = rest.find(['{', '}']) {
        out.push_str(&rest[..i]);
        let tail = &rest[i..];
        let consumed = if tail.starts_with("{{") {
            out.push('{');
            2
        } else if tail.starts_with("}}") {
            out.push('}');
            2
        } else if tail.starts_with('{') {
            let end = tail.find('}').ok_or(RenderError::UnbalancedBrace(offset + i))?;
            let name = &tail[1..end];
            let value = values.get(name).ok_or_else(|| RenderError::MissingValue(name.to_string()))?;
            out.push_str(value);
            end + 1
        } else {
            return Err(RenderError::UnbalancedBrace(offset + i));
        };
        rest = &tail[consumed..];
        offset += i + consumed;
    }
    out.push_str(rest);
    Ok(out)
}

fn json_list(items: &[String]) -> String {
    serde_json::to_string(items).expect("string lists always encode")
}

pub fn equivalence_prompt(question: &str, gold: &[String], prediction: &str) -> String {
    let values = HashMap::from([
        ("question", question.to_string()),
        ("gt_answer", json_list(gold)),
        ("pred_answer", prediction.to_string()),
    ]);
    render(EQUIVALENCE_TEMPLATE, &values).expect("equivalence template placeholders are fixed")
}

pub fn evidence_prompt(question: &str, rollout_full_text: &str) -> String {
    let values = HashMap::from([
        ("question", question.to_string()),
        ("rollout_full_text", rollout_full_text.to_string()),
    ]);
    render(EVIDENCE_TEMPLATE, &values).expect("evidence template placeholders are fixed")
}

pub fn grouping_prompt(answers: &[String]) -> String {
    let values = HashMap::from([("answers", json_list(answers))]);
    render(GROUPING_TEMPLATE, &values).expect("grouping template placeholders are fixed")
}
