use std::path::Path;

use altqa_core::metrics::{estimate_at_k, match_predictions, reward, score, AnswerKey, AtKEstimate, RewardParams};
use altqa_core::rollout::FormatVerdict;
use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::MetricsConfig;
use crate::io::{mean, read_lines, write_json, LineError};

/// One question's predictions and answer keys.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreInput {
    pub question_id: String,
    pub predictions: Vec<String>,
    pub reference: AnswerKey,
    #[serde(default)]
    pub alternatives: Vec<AnswerKey>,
    /// Whether the rollout passed the format gate; assumed when absent.
    #[serde(default)]
    pub format_valid: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreRow {
    pub question_id: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub reward: f64,
    pub hits: usize,
    /// Expected scores of `k` predictions drawn from this row's list;
    /// absent when fewer than `k` were given.
    pub at_k: Option<AtKEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroAverages {
    pub rows: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub reward: f64,
    pub at_k_rows: usize,
    pub at_k: Option<AtKEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScoreReport {
    pub alpha: f64,
    pub k: usize,
    pub rows: Vec<ScoreRow>,
    pub errors: Vec<LineError>,
    #[serde(rename = "macro")]
    pub macro_avg: MacroAverages,
}

pub fn score_one(input: ScoreInput, metrics: &MetricsConfig) -> Result<ScoreRow> {
    let params = RewardParams::new(metrics.alpha)?;
    let keys = std::iter::once(input.reference)
        .chain(input.alternatives)
        .map(AnswerKey::validated)
        .collect::<Result<Vec<_>, _>>()?;
    let m = match_predictions(&input.predictions, &keys)?;
    let triple = score(&m);
    let verdict = FormatVerdict {
        valid: input.format_valid.unwrap_or(true),
        violations: Vec::new(),
    };
    let at_k = if input.predictions.len() >= metrics.k {
        if input.predictions.len() != metrics.k_prime {
            log::debug!(
                "{}: {} predictions, expected k_prime = {}",
                input.question_id,
                input.predictions.len(),
                metrics.k_prime
            );
        }
        Some(estimate_at_k(&m.assignments, keys.len(), metrics.k)?)
    } else {
        None
    };
    Ok(ScoreRow {
        question_id: input.question_id,
        precision: triple.precision,
        recall: triple.recall,
        f1: triple.f1,
        reward: reward(&verdict, &triple, m.hits, &params),
        hits: m.hits,
        at_k,
    })
}

/// Score every line; bad lines are reported and skipped.
pub fn score_file(input: &Path, metrics: &MetricsConfig) -> Result<ScoreReport> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (line, text) in read_lines(input)? {
        let result = serde_json::from_str::<ScoreInput>(&text)
            .map_err(anyhow::Error::from)
            .and_then(|i| score_one(i, metrics));
        match result {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(LineError {
                line,
                message: format!("{e:#}"),
            }),
        }
    }
    let at_k: Vec<AtKEstimate> = rows.iter().filter_map(|r| r.at_k).collect();
    let macro_avg = MacroAverages {
        rows: rows.len(),
        precision: mean(rows.iter().map(|r| r.precision)),
        recall: mean(rows.iter().map(|r| r.recall)),
        f1: mean(rows.iter().map(|r| r.f1)),
        reward: mean(rows.iter().map(|r| r.reward)),
        at_k_rows: at_k.len(),
        at_k: (!at_k.is_empty()).then(|| AtKEstimate {
            precision: mean(at_k.iter().map(|a| a.precision)),
            recall: mean(at_k.iter().map(|a| a.recall)),
            f1: mean(at_k.iter().map(|a| a.f1)),
        }),
    };
    Ok(ScoreReport {
        alpha: metrics.alpha,
        k: metrics.k,
        rows,
        errors,
        macro_avg,
    })
}

pub fn run(input: &Path, output: &Path, metrics: &MetricsConfig) -> Result<ScoreReport> {
    let report = score_file(input, metrics)?;
    write_json(output, &report).context("writing score report")?;
    for e in &report.errors {
        log::warn!("{} line {}: {}", input.display(), e.line, e.message);
    }
    println!("{}", output.display());
    println!(
        "scored {} questions ({} errors): macro f1 {:.4}, reward {:.4}",
        report.rows.len(),
        report.errors.len(),
        report.macro_avg.f1,
        report.macro_avg.reward
    );
    Ok(report)
}

