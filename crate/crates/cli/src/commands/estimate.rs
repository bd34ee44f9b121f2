use std::path::Path;

use altqa_core::metrics::{estimate_at_k_exact, AtKEstimate};
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::io::{mean, read_lines, write_json, LineError};
use crate::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRow {
    pub line: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// The same values as reduced fractions.
    pub exact: [String; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub g: usize,
    pub k: usize,
    pub rows: Vec<EstimateRow>,
    pub errors: Vec<LineError>,
    #[serde(rename = "macro")]
    pub macro_avg: AtKEstimate,
}

/// Each input line is a JSON array of key indices or nulls, one entry per
/// sampled prediction. `k` larger than a line is a configuration error.
pub fn estimate_file(input: &Path, g: usize, k: usize) -> Result<EstimateReport> {
    if g == 0 {
        return Err(anyhow::anyhow!("g must be at least 1")).context(Failure::Config);
    }
    if k == 0 {
        return Err(anyhow::anyhow!("k must be at least 1")).context(Failure::Config);
    }
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (line, text) in read_lines(input)? {
        let hits: Vec<Option<usize>> = match serde_json::from_str(&text) {
            Ok(h) => h,
            Err(e) => {
                errors.push(LineError {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        if k > hits.len() {
            let err = anyhow::anyhow!("line {line}: k = {k} exceeds the {} predictions on the line", hits.len());
            return Err(err).context(Failure::Config);
        }
        match estimate_at_k_exact(&hits, g, k) {
            Ok(exact) => {
                let approx = exact.to_f64();
                rows.push(EstimateRow {
                    line,
                    precision: approx.precision,
                    recall: approx.recall,
                    f1: approx.f1,
                    exact: [exact.precision.to_string(), exact.recall.to_string(), exact.f1.to_string()],
                });
            }
            Err(e) => errors.push(LineError {
                line,
                message: e.to_string(),
            }),
        }
    }
    let macro_avg = AtKEstimate {
        precision: mean(rows.iter().map(|r| r.precision)),
        recall: mean(rows.iter().map(|r| r.recall)),
        f1: mean(rows.iter().map(|r| r.f1)),
    };
    Ok(EstimateReport {
        g,
        k,
        rows,
        errors,
        macro_avg,
    })
}

pub fn run(input: &Path, output: &Path, g: usize, k: usize) -> Result<EstimateReport> {
    let report = estimate_file(input, g, k)?;
    if report.rows.is_empty() && !report.errors.is_empty() {
        bail!("no line of {} could be estimated", input.display());
    }
    write_json(output, &report).context("writing estimate report")?;
    println!("{}", output.display());
    println!(
        "estimated {} lines at k = {k}: macro f1 {:.6}",
        report.rows.len(),
        report.macro_avg.f1
    );
    Ok(report)
}
