#![allow(dead_code)]

use std::collections::BTreeMap;
use std::sync::Arc;

use altqa_core::metrics::AnswerKey;
use altqa_core::rollout::{serialize_trajectory, AnswerBlock, Dialect, IngestRecord, TrajectoryBuilder};
use altqa_judge::{ChatBackend, Gateway, JudgeEndpointConfig, MockBackend, ScriptedBackend, TransportError};
use altqa_pipeline::{QuestionRecord, QuestionSamples, SampledTrajectory};
use serde_json::Map;

pub fn question(id: &str, reference: &str, aliases: &[&str]) -> QuestionRecord {
    QuestionRecord {
        question_id: id.into(),
        question: format!("question {id}?"),
        reference: AnswerKey::new(reference, aliases.iter().copied()).unwrap(),
        source_dataset: "fixture".into(),
    }
}

/// Rollout whose search result names `evidence` and whose answer is `answer`.
pub fn rollout(answer: &str, evidence: &str) -> String {
    let t = TrajectoryBuilder::new(Dialect::Instruct)
        .reasoning("look it up")
        .tool_call("{\"name\": \"search\"}")
        .tool_response(evidence)
        .answer(&AnswerBlock::new("", [answer]))
        .build()
        .unwrap();
    serialize_trajectory(&t, Dialect::Instruct).unwrap()
}

/// Samples from `(model, answer)` pairs, lines numbered in the given order.
/// Every answer is backed by its own search result.
pub fn samples(q: &QuestionRecord, rollouts: &[(&str, &str)]) -> QuestionSamples {
    let mut per_model: BTreeMap<String, Vec<SampledTrajectory>> = BTreeMap::new();
    for (i, (model, answer)) in rollouts.iter().enumerate() {
        let record = IngestRecord {
            question_id: q.question_id.clone(),
            question: q.question.clone(),
            dialect: Dialect::Instruct,
            raw: rollout(answer, &format!("It was {answer}.")),
            terminated_cleanly: Some(true),
            source_model: model.to_string(),
            sampling_temperature: None,
            extra: Map::new(),
        };
        let trajectory = record.to_trajectory().unwrap();
        let list = per_model.entry(model.to_string()).or_default();
        list.push(SampledTrajectory {
            trajectory_id: format!("{}/{model}/{}", q.question_id, list.len()),
            line: i + 1,
            record,
            trajectory,
        });
    }
    QuestionSamples {
        question: q.clone(),
        per_model,
    }
}

pub fn fast_config() -> JudgeEndpointConfig {
    JudgeEndpointConfig {
        max_retries: 0,
        backoff_base_ms: 0,
        ..JudgeEndpointConfig::default()
    }
}

pub fn gateway(backend: impl ChatBackend + 'static) -> Gateway {
    Gateway::new(fast_config(), Arc::new(backend)).unwrap()
}

pub fn mock() -> Gateway {
    gateway(MockBackend::new())
}

pub fn scripted(replies: &[&str]) -> Gateway {
    gateway(ScriptedBackend::new(
        replies.iter().map(|r| Ok::<_, TransportError>(r.to_string())).collect::<Vec<_>>(),
    ))
}

pub fn evidence_reply(label: &str) -> String {
    format!("```json\n{{\"verdict\": \"{label}\", \"claims_analysis\": []}}\n```")
}

pub fn models(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}
