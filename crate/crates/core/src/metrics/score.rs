use serde::{Deserialize, Serialize};

use super::matching::MatchOutcome;
use super::MetricsError;
use crate::rollout::FormatVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreTriple {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ScoreTriple {
    pub const ZERO: ScoreTriple = ScoreTriple {
        precision: 0.0,
        recall: 0.0,
        f1: 0.0,
    };

    pub fn from_pr(precision: f64, recall: f64) -> Self {
        let f1 = if precision > 0.0 && recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1 }
    }
}

/// Answer-level precision `hits/preds`, recall `hits/refs` and their F1.
/// Precision is 0 when nothing was predicted.
pub fn score(m: &MatchOutcome) -> ScoreTriple {
    let precision = if m.preds == 0 { 0.0 } else { m.hits as f64 / m.preds as f64 };
    let recall = if m.refs == 0 { 0.0 } else { m.hits as f64 / m.refs as f64 };
    ScoreTriple::from_pr(precision, recall)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    alpha: f64,
}

impl RewardParams {
    pub const INVALID_REWARD: f64 = 0.0;
    pub const ZERO_HIT_REWARD: f64 = 0.1;
    pub const DEFAULT_ALPHA: f64 = 0.4;

    pub fn new(alpha: f64) -> Result<Self, MetricsError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(MetricsError::AlphaOutOfRange(alpha));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// Outcome reward: 0 for a format-invalid rollout, 0.1 for a valid one with
/// no hits, otherwise `1 - alpha * (1 - f1)`.
pub fn reward(verdict: &FormatVerdict, triple: &ScoreTriple, hits: usize, params: &RewardParams) -> f64 {
    if !verdict.valid {
        RewardParams::INVALID_REWARD
    } else if hits == 0 {
        RewardParams::ZERO_HIT_REWARD
    } else {
        1.0 - params.alpha * (1.0 - triple.f1)
    }
}

/// Recall per tool call.
pub fn recall_per_tool_call(recall: f64, mean_tool_calls: f64) -> Result<f64, MetricsError> {
    if !(mean_tool_calls > 0.0) || !mean_tool_calls.is_finite() {
        return Err(MetricsError::ZeroToolCalls);
    }
    Ok(recall / mean_tool_calls)
}
