use std::collections::{BTreeMap, HashMap, HashSet};

use altqa_core::metrics::normalize_answer;
use altqa_judge::{Gateway, JudgeError};
use serde::{Deserialize, Serialize};

use crate::candidate::{CandidateRecord, Flag, Stage};
use crate::ingest::QuestionSamples;

/// How a model's rollouts for one question relate to the reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FilterCase {
    /// Every judged answer is equivalent to the reference.
    Case1,
    /// No answer is equivalent to the reference, including the case of no
    /// judged answers at all.
    Case2,
    /// Some answers are equivalent and some are not.
    Case3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelCase {
    pub source_model: String,
    pub case: FilterCase,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FilterOutcome {
    /// Every rollout with an answer, stage `Filtered` for T2 members.
    pub candidates: Vec<CandidateRecord>,
    /// One entry per model in `models`, in that order.
    pub cases: Vec<ModelCase>,
    pub judge_calls: usize,
    pub transport_failures: usize,
}

impl FilterOutcome {
    pub fn t2(&self) -> impl Iterator<Item = &CandidateRecord> {
        self.candidates.iter().filter(|c| c.stage >= Stage::Filtered)
    }
}

/// Apply the filtering rules to one question.
///
/// 1. Drop rollouts whose answer the judge finds equivalent to the reference.
/// 2. Drop every rollout of a model none of whose answers is equivalent.
/// 3. Among the rest, keep the first rollout (input order, across models)
///    of each normalized answer.
///
/// `models` lists the models to classify; one absent from `samples` is
/// classified as case 2. Judge failures exclude that rollout from T2 and
/// flag it, and do not count towards either side of the classification.
pub fn run_filtering(samples: &QuestionSamples, models: &[String], judge: &Gateway) -> FilterOutcome {
    let q = &samples.question;
    let gold: Vec<String> = q.reference.forms().map(str::to_string).collect();
    let mut out = FilterOutcome::default();
    // identical answer strings share one judge call
    let mut cache: HashMap<String, Result<bool, JudgeError>> = HashMap::new();
    let mut survivors: Vec<usize> = Vec::new();

    for model in models {
        let rollouts = samples.per_model.get(model).map(Vec::as_slice).unwrap_or(&[]);
        let start = out.candidates.len();
        let mut equivalent = Vec::new();
        for t in rollouts {
            let Some(answer) = t.candidate_answer() else { continue };
            let verdict = cache
                .entry(answer.to_string())
                .or_insert_with(|| {
                    out.judge_calls += 1;
                    judge
                        .judge_equivalence(&q.question, &gold, answer)
                        .map(|v| v.is_correct())
                })
                .clone();
            let mut record = CandidateRecord {
                question_id: q.question_id.clone(),
                trajectory_id: t.trajectory_id.clone(),
                line: t.line,
                source_model: model.clone(),
                answer: answer.to_string(),
                stage: Stage::Sampled,
                votes: None,
                flags: Vec::new(),
            };
            match verdict {
                Ok(eq) => equivalent.push(Some(eq)),
                Err(e) => {
                    if matches!(e, JudgeError::TransportFailure { .. }) {
                        out.transport_failures += 1;
                    }
                    log::warn!("{}: equivalence judge failed for {:?}: {e}", q.question_id, answer);
                    record.flag(Flag::JudgeError);
                    equivalent.push(None);
                }
            }
            out.candidates.push(record);
        }

        let n_eq = equivalent.iter().filter(|e| **e == Some(true)).count();
        let n_diff = equivalent.iter().filter(|e| **e == Some(false)).count();
        let case = match (n_eq, n_diff) {
            (0, _) => FilterCase::Case2,
            (_, 0) => FilterCase::Case1,
            _ => FilterCase::Case3,
        };
        out.cases.push(ModelCase {
            source_model: model.clone(),
            case,
        });
        if case == FilterCase::Case3 {
            survivors.extend(
                equivalent
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| **e == Some(false))
                    .map(|(i, _)| start + i),
            );
        }
    }

    survivors.sort_by_key(|&i| out.candidates[i].line);
    let mut seen = HashSet::new();
    for i in survivors {
        let c = &mut out.candidates[i];
        let norm = normalize_answer(&c.answer);
        if norm.is_empty() {
            c.flag(Flag::EmptyAnswer);
        } else if seen.insert(norm) {
            c.stage = Stage::Filtered;
        }
    }
    out
}

/// Per-model case counts over a set of outcomes.
pub(crate) fn tally_cases<'a>(cases: impl Iterator<Item = &'a ModelCase>) -> BTreeMap<String, [usize; 3]> {
    let mut tally: BTreeMap<String, [usize; 3]> = BTreeMap::new();
    for c in cases {
        let slot = match c.case {
            FilterCase::Case1 => 0,
            FilterCase::Case2 => 1,
            FilterCase::Case3 => 2,
        };
        tally.entry(c.source_model.clone()).or_default()[slot] += 1;
    }
    tally
}
