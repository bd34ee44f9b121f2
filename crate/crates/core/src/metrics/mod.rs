//! Exact-match scoring, the multi-answer reward and @k estimation.

mod estimate;
mod matching;
mod normalize;
mod score;

pub use estimate::{
    binomial, estimate_at_k, estimate_at_k_exact, estimate_at_k_with, AtKEstimate, AtKExact, EstimateStrategy,
    ENUMERATION_LIMIT,
};
pub use matching::{match_predictions, AnswerKey, MatchOutcome};
pub use normalize::normalize_answer;
pub use score::{recall_per_tool_call, reward, score, RewardParams, ScoreTriple};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("reference key set is empty")]
    EmptyReferenceSet,
    #[error("answer key {0:?} is empty after normalization")]
    EmptyAnswerKey(String),
    #[error("alpha must lie in [0, 1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("mean tool calls must be positive")]
    ZeroToolCalls,
    #[error("reference key count must be at least 1")]
    NoReferenceKeys,
    #[error("subset size {k} outside 1..={pool}")]
    SubsetSizeOutOfRange { k: usize, pool: usize },
    #[error("key index {index} out of range for {keys} keys")]
    KeyIndexOutOfRange { index: usize, keys: usize },
    #[error("subset counts for C({n}, {k}) overflow 128 bits")]
    BinomialOverflow { n: usize, k: usize },
    #[error("C({n}, {k}) subsets exceed the enumeration limit")]
    EnumerationTooLarge { n: usize, k: usize },
}
