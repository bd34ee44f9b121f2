use super::answer::parse_answer_payload;
use super::{ActionKind, ActionStep, Dialect, ParseWarning, Span, Trajectory, EOS_MARKERS, MAX_SUGGESTED_ANSWERS};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("empty rollout text")]
    EmptyInput,
    #[error("unknown dialect `{0}`")]
    UnknownDialect(String),
    #[error("unbalanced <{tag}> tag at byte {offset}")]
    UnbalancedTags { tag: String, offset: usize },
    #[error("tool response at byte {offset} does not follow a tool call")]
    OrphanToolResponse { offset: usize },
}

/// Where a block ends and how it was closed.
struct Close {
    at: usize,
    end: usize,
    warning: Option<ParseWarning>,
}

fn find_close(raw: &str, body_start: usize, dialect: Dialect, kind: ActionKind) -> Option<Close> {
    let tag = dialect.tag(kind);
    let close_prefix = format!("</{tag}");
    let open = dialect.open_tag(kind);
    let body = &raw[body_start..];

    let proper = body.find(&close_prefix).map(|rel| {
        let at = body_start + rel;
        let after = at + close_prefix.len();
        if raw[after..].starts_with('>') {
            Close { at, end: after + 1, warning: None }
        } else {
            Close {
                at,
                end: after,
                warning: Some(ParseWarning::UnterminatedCloseTag { kind, offset: at }),
            }
        }
    });
    let reopened = body.find(&open).map(|rel| {
        let at = body_start + rel;
        Close {
            at,
            end: at + open.len(),
            warning: Some(ParseWarning::ReopenedAsClose { kind, offset: at }),
        }
    });

    match (proper, reopened) {
        (Some(p), Some(r)) => Some(if r.at < p.at { r } else { p }),
        (p, r) => p.or(r),
    }
}

fn opening_kind(rest: &str, dialect: Dialect) -> Option<ActionKind> {
    ActionKind::ALL
        .into_iter()
        .find(|&kind| rest.starts_with(&dialect.open_tag(kind)))
}

fn stray_close(rest: &str, dialect: Dialect) -> Option<ActionKind> {
    ActionKind::ALL
        .into_iter()
        .find(|&kind| rest.starts_with(&dialect.close_tag(kind)))
}

/// True when nothing but whitespace and end-of-sequence markers follow `from`.
pub(super) fn only_eos_after(raw: &str, from: usize) -> bool {
    let mut rest = raw[from..].trim_start();
    loop {
        if rest.is_empty() {
            return true;
        }
        match EOS_MARKERS.iter().find(|m| rest.starts_with(*m)) {
            Some(marker) => rest = rest[marker.len()..].trim_start(),
            None => return false,
        }
    }
}

/// Split `raw` into classified steps.
///
/// Two common generation slips are tolerated and recorded as warnings: a
/// block closed by repeating its opening tag, and a closing tag missing its
/// `>`. Anything else that leaves a block open, or a closing tag with no
/// open block, is an [`ParseError::UnbalancedTags`] error.
///
/// Without an external termination signal, a rollout counts as cleanly
/// terminated when its last step is an answer followed only by whitespace
/// and end-of-sequence markers.
pub fn parse_trajectory(raw: &str, dialect: Dialect) -> Result<Trajectory, ParseError> {
    if raw.trim().is_empty() {
        return Err(ParseError::EmptyInput);
    }

    let mut steps = Vec::new();
    let mut warnings = Vec::new();
    let mut pos = 0;

    while let Some(rel) = raw[pos..].find('<') {
        let idx = pos + rel;
        let rest = &raw[idx..];
        if let Some(kind) = opening_kind(rest, dialect) {
            let body_start = idx + dialect.open_tag(kind).len();
            let close = find_close(raw, body_start, dialect, kind).ok_or_else(|| ParseError::UnbalancedTags {
                tag: dialect.tag(kind).to_string(),
                offset: idx,
            })?;
            if let Some(w) = close.warning {
                warnings.push(w);
            }
            steps.push(ActionStep {
                kind,
                payload: raw[body_start..close.at].to_string(),
                span: Span::new(idx, close.end),
            });
            pos = close.end;
        } else if let Some(kind) = stray_close(rest, dialect) {
            return Err(ParseError::UnbalancedTags {
                tag: dialect.tag(kind).to_string(),
                offset: idx,
            });
        } else {
            pos = idx + 1;
        }
    }

    for (i, step) in steps.iter().enumerate() {
        if step.kind == ActionKind::ToolResponse && (i == 0 || steps[i - 1].kind != ActionKind::ToolCall) {
            return Err(ParseError::OrphanToolResponse { offset: step.span.start });
        }
    }

    let answer = match steps.iter().rev().find(|s| s.kind == ActionKind::Answer) {
        None => None,
        Some(step) => match parse_answer_payload(&step.payload, dialect) {
            Ok(block) => {
                if dialect == Dialect::Instruct && block.answers.len() > MAX_SUGGESTED_ANSWERS {
                    warnings.push(ParseWarning::TooManyAnswers { count: block.answers.len() });
                }
                Some(block)
            }
            Err(e) => {
                warnings.push(ParseWarning::UnparseableAnswer { reason: e.to_string() });
                None
            }
        },
    };

    let terminated_cleanly = matches!(steps.last(), Some(last) if last.kind == ActionKind::Answer)
        && only_eos_after(raw, steps.last().map_or(0, |s| s.span.end));

    Ok(Trajectory {
        question_id: String::new(),
        question: String::new(),
        dialect,
        raw: raw.to_string(),
        steps,
        terminated_cleanly,
        answer,
        warnings,
    })
}
