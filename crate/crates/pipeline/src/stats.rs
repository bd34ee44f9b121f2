use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::candidate::Stage;
use crate::filter::tally_cases;
use crate::run::PipelineRun;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRetention {
    pub stage: String,
    pub trajectories: usize,
    /// Percentage of the previous stage's count; absent for the first
    /// stage and when the previous stage is empty.
    pub percent_of_previous: Option<f64>,
}

impl StageRetention {
    pub fn report(&self) -> String {
        match self.percent_of_previous {
            Some(p) => format!("{}: {} ({p:.1}% of those from the previous step)", self.stage, self.trajectories),
            None => format!("{}: {}", self.stage, self.trajectories),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CaseTally {
    pub case1: usize,
    pub case2: usize,
    pub case3: usize,
}

impl CaseTally {
    pub fn total(&self) -> usize {
        self.case1 + self.case2 + self.case3
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct JudgeCallStats {
    pub equivalence_calls: usize,
    pub verification_calls: usize,
    pub grouping_calls: usize,
    pub transport_failures: usize,
}

impl JudgeCallStats {
    pub fn total_calls(&self) -> usize {
        self.equivalence_calls + self.verification_calls + self.grouping_calls
    }

    /// Share of calls that ended in transport exhaustion; 0 without calls.
    pub fn failure_fraction(&self) -> f64 {
        match self.total_calls() {
            0 => 0.0,
            n => self.transport_failures as f64 / n as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineStats {
    pub questions: usize,
    /// Questions with at least one rollout; only these are classified.
    pub questions_considered: usize,
    pub stages: Vec<StageRetention>,
    pub case_tallies: BTreeMap<String, CaseTally>,
    /// Number of questions per answer count (reference included).
    pub multiplicity_histogram: BTreeMap<usize, usize>,
    pub ambiguity_ratio: BTreeMap<String, f64>,
    pub overall_ambiguity_ratio: f64,
    pub judge: JudgeCallStats,
    /// Questions whose grouping fell back to singletons.
    pub flagged_questions: Vec<String>,
    pub interrupted: bool,
}

impl PipelineStats {
    pub fn retention_report(&self) -> String {
        self.stages.iter().map(StageRetention::report).collect::<Vec<_>>().join("\n")
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_stats(run: &PipelineRun) -> PipelineStats {
    let qs = &run.questions;
    let t1: usize = qs.iter().map(|q| q.sampled).sum();
    let t2: usize = qs.iter().map(|q| q.count_at(Stage::Filtered)).sum();
    let t3: usize = qs.iter().map(|q| q.count_at(Stage::Verified)).sum();
    let mut stages = Vec::new();
    let mut previous: Option<usize> = None;
    for (name, n) in [("T1 sampled", t1), ("T2 filtered", t2), ("T3 verified", t3)] {
        stages.push(StageRetention {
            stage: name.to_string(),
            trajectories: n,
            percent_of_previous: previous.filter(|&p| p > 0).map(|p| 100.0 * n as f64 / p as f64),
        });
        previous = Some(n);
    }

    let case_tallies = tally_cases(qs.iter().flat_map(|q| &q.cases))
        .into_iter()
        .map(|(model, [case1, case2, case3])| (model, CaseTally { case1, case2, case3 }))
        .collect();

    let mut multiplicity_histogram = BTreeMap::new();
    let mut per_source: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for q in qs {
        *multiplicity_histogram.entry(q.mined.answer_count()).or_insert(0) += 1;
        let slot = per_source.entry(q.source_dataset.clone()).or_default();
        slot.1 += 1;
        if !q.mined.alternatives.is_empty() {
            slot.0 += 1;
        }
    }
    let with_alternatives = qs.iter().filter(|q| !q.mined.alternatives.is_empty()).count();

    let judge = qs.iter().fold(JudgeCallStats::default(), |acc, q| JudgeCallStats {
        equivalence_calls: acc.equivalence_calls + q.equivalence_calls,
        verification_calls: acc.verification_calls + q.verification_calls,
        grouping_calls: acc.grouping_calls + q.grouping_calls,
        transport_failures: acc.transport_failures + q.transport_failures,
    });

    PipelineStats {
        questions: qs.len(),
        questions_considered: qs.iter().filter(|q| q.sampled > 0).count(),
        stages,
        case_tallies,
        multiplicity_histogram,
        ambiguity_ratio: per_source.into_iter().map(|(k, (a, n))| (k, ratio(a, n))).collect(),
        overall_ambiguity_ratio: ratio(with_alternatives, qs.len()),
        judge,
        flagged_questions: qs
            .iter()
            .filter(|q| q.mined.grouping_failure.is_some())
            .map(|q| q.question_id.clone())
            .collect(),
        interrupted: run.interrupted,
    }
}
