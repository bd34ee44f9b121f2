use serde::Deserialize;
use serde_json::Value;

use crate::verdict::{ClaimAnalysis, EquivalenceVerdict, EvidenceLabel, EvidenceVerdict, GroupingResult, Judgement};

/// Why a reply could not be turned into a verdict.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum ReplyError {
    /// No JSON of the expected shape; worth asking again.
    Unparseable(String),
    /// Well-formed JSON carrying an invalid label.
    Malformed(String),
}

/// The body of the first fenced code block, or the whole trimmed text when
/// there is none. A missing closing fence runs to the end of the text.
pub fn extract_fenced_block(text: &str) -> &str {
    let Some(open) = text.find("```") else {
        return text.trim();
    };
    let after = &text[open + 3..];
    // skip an info string such as `json`
    let body = match after.find('\n') {
        Some(nl) if after[..nl].trim().chars().all(|c| c.is_ascii_alphanumeric()) => &after[nl + 1..],
        _ => after,
    };
    match body.find("```") {
        Some(close) => body[..close].trim(),
        None => body.trim(),
    }
}

/// Parse JSON from a reply, falling back to the outermost `open..close`
/// span when the extracted block carries surrounding prose.
fn parse_json(text: &str, open: char, close: char) -> Result<Value, ReplyError> {
    let block = extract_fenced_block(text);
    if let Ok(v) = serde_json::from_str(block) {
        return Ok(v);
    }
    for candidate in [block, text] {
        if let (Some(a), Some(b)) = (candidate.find(open), candidate.rfind(close)) {
            if a < b {
                if let Ok(v) = serde_json::from_str(&candidate[a..=b]) {
                    return Ok(v);
                }
            }
        }
    }
    Err(ReplyError::Unparseable(format!("no JSON found in {:?}", truncate(text))))
}

fn truncate(text: &str) -> &str {
    match text.char_indices().nth(200) {
        Some((i, _)) => &text[..i],
        None => text,
    }
}

pub(crate) fn parse_equivalence(text: &str) -> Result<EquivalenceVerdict, ReplyError> {
    #[derive(Deserialize)]
    struct Raw {
        #[serde(default)]
        rationale: String,
        judgement: String,
    }
    let raw: Raw = serde_json::from_value(parse_json(text, '{', '}')?)
        .map_err(|e| ReplyError::Unparseable(e.to_string()))?;
    let judgement = Judgement::parse(&raw.judgement)
        .ok_or_else(|| ReplyError::Malformed(format!("judgement {:?}", raw.judgement)))?;
    Ok(EquivalenceVerdict {
        judgement,
        rationale: raw.rationale,
    })
}

pub(crate) fn parse_evidence(text: &str) -> Result<EvidenceVerdict, ReplyError> {
    #[derive(Deserialize)]
    struct Raw {
        verdict: String,
        #[serde(default)]
        claims_analysis: Vec<ClaimAnalysis>,
    }
    let raw: Raw = serde_json::from_value(parse_json(text, '{', '}')?)
        .map_err(|e| ReplyError::Unparseable(e.to_string()))?;
    let verdict =
        EvidenceLabel::parse(&raw.verdict).ok_or_else(|| ReplyError::Malformed(format!("verdict {:?}", raw.verdict)))?;
    Ok(EvidenceVerdict {
        verdict,
        claims: raw.claims_analysis,
    })
}

pub(crate) fn parse_grouping(text: &str) -> Result<GroupingResult, ReplyError> {
    let groups: Vec<Vec<String>> = serde_json::from_value(parse_json(text, '[', ']')?)
        .map_err(|e| ReplyError::Unparseable(e.to_string()))?;
    Ok(GroupingResult { groups })
}
