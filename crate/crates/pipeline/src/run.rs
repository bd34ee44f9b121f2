use std::collections::BTreeSet;
use std::sync::atomic::{AtomicBool, Ordering};

use altqa_judge::Gateway;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidate::{CandidateRecord, Stage};
use crate::filter::{run_filtering, ModelCase};
use crate::group::{run_grouping, MinedQuestion};
use crate::ingest::{QuestionSamples, T1};
use crate::stats::{compute_stats, PipelineStats};
use crate::verify::{run_verification, VerificationPolicy, VoteTable};
use crate::PipelineError;

/// One equivalence judge, `K` evidence verifiers and one grouping judge.
pub struct Judges {
    pub equivalence: Gateway,
    pub verifiers: Vec<Gateway>,
    pub grouping: Gateway,
}

/// How many rollouts were sampled per question; used to check ingest
/// volumes against expectations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub models: Vec<String>,
    pub rollouts_per_model: usize,
    pub temperature: f64,
}

impl SamplingPlan {
    pub fn expected_trajectories(&self, questions: usize) -> usize {
        self.models.len() * self.rollouts_per_model * questions
    }
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self {
            models: Vec::new(),
            rollouts_per_model: 16,
            temperature: 1.0,
        }
    }
}

/// Everything the pipeline produced for one question.
#[derive(Debug, Clone, PartialEq)]
pub struct QuestionRun {
    pub question_id: String,
    pub source_dataset: String,
    pub sampled: usize,
    pub candidates: Vec<CandidateRecord>,
    pub cases: Vec<ModelCase>,
    pub votes: VoteTable,
    pub mined: MinedQuestion,
    pub equivalence_calls: usize,
    pub verification_calls: usize,
    pub grouping_calls: usize,
    pub transport_failures: usize,
}

impl QuestionRun {
    pub fn count_at(&self, stage: Stage) -> usize {
        self.candidates.iter().filter(|c| c.stage >= stage).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineRun {
    pub models: Vec<String>,
    pub policy: VerificationPolicy,
    /// Sorted by question id.
    pub questions: Vec<QuestionRun>,
    /// True when a cancellation request stopped the run early.
    pub interrupted: bool,
}

impl PipelineRun {
    pub fn mined(&self) -> Vec<MinedQuestion> {
        self.questions.iter().map(|q| q.mined.clone()).collect()
    }

    pub fn candidates(&self) -> impl Iterator<Item = &CandidateRecord> {
        self.questions.iter().flat_map(|q| &q.candidates)
    }

    pub fn stats(&self) -> PipelineStats {
        compute_stats(self)
    }
}

/// Models seen anywhere in T1, sorted.
pub fn models_in(t1: &T1) -> Vec<String> {
    t1.values()
        .flat_map(|q| q.per_model.keys().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn run_question(
    samples: &QuestionSamples,
    models: &[String],
    judges: &Judges,
    policy: &VerificationPolicy,
) -> Result<QuestionRun, PipelineError> {
    let q = &samples.question;
    let filtered = run_filtering(samples, models, &judges.equivalence);
    let mut candidates = filtered.candidates;
    let verified = run_verification(samples, &mut candidates, &judges.verifiers, policy)?;
    let (mined, grouped) = run_grouping(q, &mut candidates, &judges.grouping);
    mined.validate()?;
    Ok(QuestionRun {
        question_id: q.question_id.clone(),
        source_dataset: q.source_dataset.clone(),
        sampled: samples.len(),
        candidates,
        cases: if samples.is_empty() { Vec::new() } else { filtered.cases },
        votes: verified.table,
        mined,
        equivalence_calls: filtered.judge_calls,
        verification_calls: verified.calls,
        grouping_calls: grouped.calls,
        transport_failures: filtered.transport_failures + verified.transport_failures + grouped.transport_failures,
    })
}

/// Run every stage over T1. Questions are processed in parallel; the
/// result is ordered by question id and does not depend on scheduling.
/// Questions without rollouts emit their reference only and are not
/// classified.
pub fn run_pipeline(t1: &T1, judges: &Judges, policy: &VerificationPolicy) -> Result<PipelineRun, PipelineError> {
    run_pipeline_with_cancel(t1, judges, policy, None, &AtomicBool::new(false))
}

/// As [`run_pipeline`], restricted to `models` when given. Once `cancel`
/// is set no new question is started; finished ones are kept.
pub fn run_pipeline_with_cancel(
    t1: &T1,
    judges: &Judges,
    policy: &VerificationPolicy,
    models: Option<&[String]>,
    cancel: &AtomicBool,
) -> Result<PipelineRun, PipelineError> {
    let policy = VerificationPolicy::new(policy.eta, policy.k)?;
    if judges.verifiers.len() != policy.k {
        return Err(PipelineError::InvalidPolicy(format!(
            "policy expects {} verifiers, {} configured",
            policy.k,
            judges.verifiers.len()
        )));
    }
    let models = models.map_or_else(|| models_in(t1), <[String]>::to_vec);
    let samples: Vec<&QuestionSamples> = t1.values().collect();
    let results: Vec<Option<Result<QuestionRun, PipelineError>>> = samples
        .par_iter()
        .map(|s| {
            if cancel.load(Ordering::SeqCst) {
                None
            } else {
                Some(run_question(s, &models, judges, &policy))
            }
        })
        .collect();
    let interrupted = results.iter().any(Option::is_none);
    let questions = results.into_iter().flatten().collect::<Result<Vec<_>, _>>()?;
    Ok(PipelineRun {
        models,
        policy,
        questions,
        interrupted,
    })
}
