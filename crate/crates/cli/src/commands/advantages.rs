use std::path::Path;

use altqa_core::grpo::{normalize_advantages, RolloutGroup};
use anyhow::{Context, Result};
use serde::Serialize;

use crate::io::{read_lines, write_text, LineError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdvantageRow {
    pub line: usize,
    pub mean: f64,
    pub std: f64,
    pub advantages: Vec<f64>,
}

/// Each input line is a JSON array with one group's rewards. Output is
/// one JSON object per group.
pub fn advantages_file(input: &Path) -> Result<(Vec<AdvantageRow>, Vec<LineError>)> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (line, text) in read_lines(input)? {
        let group = serde_json::from_str::<Vec<f64>>(&text)
            .map_err(anyhow::Error::from)
            .and_then(|r| RolloutGroup::new(r).map_err(anyhow::Error::from));
        match group {
            Ok(g) => rows.push(AdvantageRow {
                line,
                mean: g.mean(),
                std: g.std(),
                advantages: normalize_advantages(&g),
            }),
            Err(e) => errors.push(LineError {
                line,
                message: format!("{e:#}"),
            }),
        }
    }
    Ok((rows, errors))
}

pub fn run(input: &Path, output: &Path) -> Result<()> {
    let (rows, errors) = advantages_file(input)?;
    let mut text = String::new();
    for row in &rows {
        text.push_str(&serde_json::to_string(row)?);
        text.push('\n');
    }
    write_text(output, &text).context("writing advantages")?;
    for e in &errors {
        log::warn!("{} line {}: {}", input.display(), e.line, e.message);
    }
    println!("{}", output.display());
    println!("normalized {} groups ({} errors)", rows.len(), errors.len());
    Ok(())
}
