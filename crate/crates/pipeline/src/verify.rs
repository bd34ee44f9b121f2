use std::collections::HashMap;

use altqa_judge::{Gateway, JudgeError};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::candidate::{CandidateRecord, Flag, Stage, Vote};
use crate::ingest::QuestionSamples;
use crate::PipelineError;

/// `eta` is a count: a candidate needs at least `eta` supported votes out
/// of `k` verifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationPolicy {
    pub eta: usize,
    pub k: usize,
}

impl VerificationPolicy {
    pub const DEFAULT_ETA: usize = 3;
    pub const DEFAULT_K: usize = 4;

    pub fn new(eta: usize, k: usize) -> Result<Self, PipelineError> {
        if k == 0 {
            return Err(PipelineError::InvalidPolicy("at least one verifier is required".into()));
        }
        if eta == 0 || eta > k {
            return Err(PipelineError::InvalidPolicy(format!("eta must lie in 1..={k}, got {eta}")));
        }
        Ok(Self { eta, k })
    }
}

impl Default for VerificationPolicy {
    fn default() -> Self {
        Self {
            eta: Self::DEFAULT_ETA,
            k: Self::DEFAULT_K,
        }
    }
}

/// Votes for every T2 candidate of a question, kept or not: one row per
/// candidate (by trajectory id) and one column per verifier.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct VoteTable {
    pub rows: Vec<(String, Vec<Vote>)>,
}

impl VoteTable {
    pub fn supported_counts(&self) -> Vec<usize> {
        self.rows
            .iter()
            .map(|(_, r)| r.iter().filter(|v| v.supports()).count())
            .collect()
    }

    pub fn kept(&self, eta: usize) -> Vec<bool> {
        self.supported_counts().into_iter().map(|n| n >= eta).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyOutcome {
    pub table: VoteTable,
    pub calls: usize,
    pub transport_failures: usize,
}

/// Ask every verifier about each T2 candidate and promote those with enough
/// supported votes to `Verified`. Votes are attached to promoted candidates
/// and reported for all of them in the table. A failed call counts as a
/// non-supporting vote and flags the candidate.
pub fn run_verification(
    samples: &QuestionSamples,
    candidates: &mut [CandidateRecord],
    verifiers: &[Gateway],
    policy: &VerificationPolicy,
) -> Result<VerifyOutcome, PipelineError> {
    if verifiers.len() != policy.k {
        return Err(PipelineError::InvalidPolicy(format!(
            "policy expects {} verifiers, {} configured",
            policy.k,
            verifiers.len()
        )));
    }
    let rollouts: HashMap<&str, &str> = samples
        .per_model
        .values()
        .flatten()
        .map(|t| (t.trajectory_id.as_str(), t.record.raw.as_str()))
        .collect();
    let question = &samples.question.question;

    let results: Vec<(String, Vec<Vote>, usize, usize)> = candidates
        .par_iter_mut()
        .filter(|c| c.stage == Stage::Filtered)
        .map(|c| {
            let raw = rollouts.get(c.trajectory_id.as_str()).copied().unwrap_or_default();
            let (mut calls, mut failures) = (0, 0);
            let votes: Vec<Vote> = verifiers
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    calls += 1;
                    match v.verify_evidence(question, raw, &c.answer) {
                        Ok(verdict) => Vote {
                            verifier: i,
                            label: Some(verdict.verdict),
                            error: None,
                        },
                        Err(e) => {
                            if matches!(e, JudgeError::TransportFailure { .. }) {
                                failures += 1;
                            }
                            Vote {
                                verifier: i,
                                label: None,
                                error: Some(e.to_string()),
                            }
                        }
                    }
                })
                .collect();
            if votes.iter().any(|v| v.error.is_some()) {
                c.flag(Flag::JudgeError);
            }
            if votes.iter().filter(|v| v.supports()).count() >= policy.eta {
                c.stage = Stage::Verified;
                c.votes = Some(votes.clone());
            }
            (c.trajectory_id.clone(), votes, calls, failures)
        })
        .collect();
    let mut out = VerifyOutcome::default();
    for (id, votes, calls, failures) in results {
        out.table.rows.push((id, votes));
        out.calls += calls;
        out.transport_failures += failures;
    }
    Ok(out)
}
