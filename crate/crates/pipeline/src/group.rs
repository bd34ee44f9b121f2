use std::collections::BTreeSet;

use altqa_core::metrics::{normalize_answer, AnswerKey};
use altqa_judge::{Gateway, JudgeError};
use serde::{Deserialize, Serialize};

use crate::candidate::{CandidateRecord, Stage};
use crate::manifest::QuestionRecord;
use crate::PipelineError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinedQuestion {
    pub question_id: String,
    pub question: String,
    pub source_dataset: String,
    pub reference: AnswerKey,
    pub alternatives: Vec<AnswerKey>,
    /// Trajectories whose answers were folded into the reference key.
    pub reference_provenance: Vec<String>,
    /// Supporting trajectory ids, aligned with `alternatives`.
    pub provenance: Vec<Vec<String>>,
    /// Why grouping fell back to singleton keys, if it did.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grouping_failure: Option<String>,
}

impl MinedQuestion {
    pub fn reference_only(q: &QuestionRecord) -> Self {
        Self {
            question_id: q.question_id.clone(),
            question: q.question.clone(),
            source_dataset: q.source_dataset.clone(),
            reference: q.reference.clone(),
            alternatives: Vec::new(),
            reference_provenance: Vec::new(),
            provenance: Vec::new(),
            grouping_failure: None,
        }
    }

    pub fn answer_count(&self) -> usize {
        1 + self.alternatives.len()
    }

    /// No normalized form may occur in two keys.
    pub fn validate(&self) -> Result<(), PipelineError> {
        let violation = |message: String| PipelineError::InvariantViolation {
            question_id: self.question_id.clone(),
            message,
        };
        if self.provenance.len() != self.alternatives.len() {
            return Err(violation("provenance does not align with alternatives".into()));
        }
        let mut seen = BTreeSet::new();
        for key in std::iter::once(&self.reference).chain(&self.alternatives) {
            for form in key.normalized_forms() {
                if !seen.insert(form.clone()) {
                    return Err(violation(format!("normalized form {form:?} appears in two keys")));
                }
            }
        }
        Ok(())
    }
}

/// Canonical member of a cluster and its sorted aliases. The canonical is
/// the longest member by character count, ties going to the
/// lexicographically smallest.
pub fn canonical_of(members: &[String]) -> (String, Vec<String>) {
    let canonical = members
        .iter()
        .min_by(|a, b| b.chars().count().cmp(&a.chars().count()).then_with(|| a.cmp(b)))
        .expect("clusters are non-empty")
        .clone();
    let mut aliases: Vec<String> = members.iter().filter(|m| **m != canonical).cloned().collect();
    aliases.sort();
    aliases.dedup();
    (canonical, aliases)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GroupCalls {
    pub calls: usize,
    pub transport_failures: usize,
}

/// Cluster the verified answers of one question into answer keys.
///
/// Clusters sharing a normalized form with the reference are folded into
/// its aliases. If the grouping judge fails or returns something that is
/// not a partition, every answer becomes its own key and the failure is
/// recorded on the question.
pub fn run_grouping(
    question: &QuestionRecord,
    candidates: &mut [CandidateRecord],
    grouper: &Gateway,
) -> (MinedQuestion, GroupCalls) {
    let mut mined = MinedQuestion::reference_only(question);
    let mut calls = GroupCalls::default();
    let mut verified: Vec<usize> = (0..candidates.len())
        .filter(|&i| candidates[i].stage == Stage::Verified)
        .collect();
    if verified.is_empty() {
        return (mined, calls);
    }
    verified.sort_by_key(|&i| candidates[i].line);
    let answers: Vec<String> = verified.iter().map(|&i| candidates[i].answer.clone()).collect();

    calls.calls += 1;
    let groups: Vec<Vec<String>> = match grouper.group_answers(&answers) {
        Ok(result) => result.groups,
        Err(e) => {
            if matches!(e, JudgeError::TransportFailure { .. }) {
                calls.transport_failures += 1;
            }
            log::warn!("{}: grouping failed, emitting singletons: {e}", question.question_id);
            mined.grouping_failure = Some(e.to_string());
            answers.iter().map(|a| vec![a.clone()]).collect()
        }
    };

    let reference_forms = question.reference.normalized_forms();
    let mut reference_aliases = question.reference.aliases.clone();
    let mut clusters: Vec<(usize, AnswerKey, Vec<String>)> = Vec::new();
    for group in groups {
        // answers are distinct strings, so each member names one candidate
        let members: Vec<usize> = group
            .iter()
            .filter_map(|a| verified.iter().copied().find(|&i| candidates[i].answer == *a))
            .collect();
        let mut ids: Vec<(usize, String)> = members
            .iter()
            .map(|&i| (candidates[i].line, candidates[i].trajectory_id.clone()))
            .collect();
        ids.sort();
        let first_line = ids.first().map_or(usize::MAX, |(l, _)| *l);
        let ids: Vec<String> = ids.into_iter().map(|(_, id)| id).collect();
        for &i in &members {
            candidates[i].stage = Stage::Grouped;
        }
        if group.iter().any(|a| reference_forms.contains(&normalize_answer(a))) {
            reference_aliases.extend(group);
            mined.reference_provenance.extend(ids);
            continue;
        }
        let (canonical, aliases) = canonical_of(&group);
        let key = AnswerKey::new(canonical, aliases).expect("verified answers normalize to non-empty text");
        clusters.push((first_line, key, ids));
    }
    mined.reference_provenance.sort();
    mined.reference = AnswerKey::new(question.reference.canonical.clone(), reference_aliases)
        .expect("the reference canonical was validated on ingest");
    clusters.sort_by_key(|(line, _, _)| *line);
    for (_, key, ids) in clusters {
        mined.alternatives.push(key);
        mined.provenance.push(ids);
    }
    (mined, calls)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn longest_member_is_canonical() {
        let (c, a) = canonical_of(&["NDZ".to_string(), "Nkosazana Dlamini-Zuma".to_string()]);
        assert_eq!(c, "Nkosazana Dlamini-Zuma");
        assert_eq!(a, vec!["NDZ"]);
        let (c, a) = canonical_of(&["bb".to_string(), "ab".to_string(), "c".to_string()]);
        assert_eq!((c.as_str(), a), ("ab", vec!["bb".to_string(), "c".to_string()]));
    }
}
