//! Mining alternative answers from sampled search-agent rollouts.
//!
//! Stages, each narrowing the candidate set of a question:
//!
//! 1. [`ingest_samples`]: rollouts grouped by question and model (T1);
//! 2. [`run_filtering`]: drop answers equivalent to the reference, drop
//!    models that never reach the reference, deduplicate (T2);
//! 3. [`run_verification`]: keep candidates with at least `eta` supported
//!    votes from `K` evidence verifiers (T3);
//! 4. [`run_grouping`]: cluster surviving answers into answer keys.
//!
//! [`emit_dataset`] writes the result and [`compute_stats`] summarizes it.

mod candidate;
mod emit;
mod filter;
mod group;
mod ingest;
mod manifest;
mod run;
mod stats;
pub mod synth;
mod verify;

pub use candidate::{CandidateRecord, Flag, Stage, Vote};
pub use emit::{emit_dataset, render_dataset, AnswerEntry, DatasetRecord};
pub use filter::{run_filtering, FilterCase, FilterOutcome, ModelCase};
pub use group::{canonical_of, run_grouping, MinedQuestion};
pub use ingest::{ingest_samples, ingest_with_manifest, QuestionSamples, SampledTrajectory, T1};
pub use manifest::{read_manifest, QuestionRecord};
pub use run::{models_in, run_pipeline, run_pipeline_with_cancel, Judges, PipelineRun, QuestionRun, SamplingPlan};
pub use stats::{compute_stats, CaseTally, JudgeCallStats, PipelineStats, StageRetention};
pub use verify::{run_verification, VerificationPolicy, VerifyOutcome, VoteTable};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{file} line {line}: {message}")]
    ParseFailure { file: String, line: usize, message: String },
    #[error("{file} line {line}: unknown question id {question_id:?}")]
    UnknownQuestionId {
        file: String,
        line: usize,
        question_id: String,
    },
    #[error("duplicate question id {0:?} in manifest")]
    DuplicateQuestion(String),
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("invariant violated for question {question_id}: {message}")]
    InvariantViolation { question_id: String, message: String },
}
