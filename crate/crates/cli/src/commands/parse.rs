use std::path::Path;

use altqa_core::rollout::{check_format_validity, IngestRecord, ParseWarning, Violation};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::io::{read_lines, write_text};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LintRow {
    pub line: usize,
    pub question_id: Option<String>,
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub warnings: Vec<ParseWarning>,
    pub tool_calls: usize,
    pub answers: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn lint_line(line: usize, text: &str) -> LintRow {
    let failed = |question_id, error: String| LintRow {
        line,
        question_id,
        valid: false,
        violations: Vec::new(),
        warnings: Vec::new(),
        tool_calls: 0,
        answers: Vec::new(),
        error: Some(error),
    };
    let record: IngestRecord = match serde_json::from_str(text) {
        Ok(r) => r,
        Err(e) => return failed(None, e.to_string()),
    };
    match record.to_trajectory() {
        Ok(t) => {
            let verdict = check_format_validity(&t);
            LintRow {
                line,
                question_id: Some(record.question_id),
                valid: verdict.valid,
                violations: verdict.violations,
                tool_calls: t.tool_call_count(),
                answers: t.answer.as_ref().map(|a| a.answers.clone()).unwrap_or_default(),
                warnings: t.warnings,
                error: None,
            }
        }
        Err(e) => failed(Some(record.question_id), e.to_string()),
    }
}

/// Lint an ingest file: one row per non-blank line.
pub fn lint_file(input: &Path) -> Result<Vec<LintRow>> {
    Ok(read_lines(input)?.iter().map(|(n, t)| lint_line(*n, t)).collect())
}

pub fn run(input: &Path, output: Option<&Path>) -> Result<Vec<LintRow>> {
    let rows = lint_file(input)?;
    if let Some(output) = output {
        let mut text = String::new();
        for row in &rows {
            text.push_str(&serde_json::to_string(row)?);
            text.push('\n');
        }
        write_text(output, &text).context("writing lint report")?;
        println!("{}", output.display());
    }
    for row in rows.iter().filter(|r| !r.valid) {
        match &row.error {
            Some(e) => println!("line {}: unreadable: {e}", row.line),
            None => println!("line {}: invalid: {:?}", row.line, row.violations),
        }
    }
    let valid = rows.iter().filter(|r| r.valid).count();
    println!("{} rollouts, {valid} valid, {} invalid", rows.len(), rows.len() - valid);
    Ok(rows)
}
