//! Rollout parsing, answer scoring and group-advantage arithmetic for
//! multi-answer search agents.

pub mod entropy;
pub mod grpo;
pub mod metrics;
pub mod rollout;

pub use metrics::{AnswerKey, MatchOutcome, MetricsError, ScoreTriple};
pub use rollout::{Dialect, Trajectory};
