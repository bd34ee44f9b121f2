//! Seeded synthetic corpora and offline judges for exercising the pipeline
//! without live models.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use altqa_core::metrics::AnswerKey;
use altqa_core::rollout::{serialize_trajectory, AnswerBlock, Dialect, IngestRecord, TrajectoryBuilder};
use altqa_judge::{Gateway, JudgeEndpointConfig, MockBackend};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::manifest::QuestionRecord;
use crate::run::Judges;
use crate::PipelineError;

const NAMES: &[&str] = &[
    "Ashford", "Belmont", "Carrow", "Dunmore", "Elstree", "Fenwick", "Galloway", "Harrow", "Ilkley", "Jarrow",
    "Kendal", "Ludlow", "Marlow", "Norwich", "Oakham", "Penrith", "Quorn", "Redcar", "Selby", "Thirsk",
    "Ulverston", "Ventnor", "Whitby", "Yarmouth", "Zennor",
];
const SOURCES: &[&str] = &["musique", "2wiki", "nq"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    /// The reference, sometimes with changed case.
    Reference,
    /// An answer backed by a search result.
    Grounded,
    /// An answer only mentioned in the model's own reasoning.
    ReasoningOnly,
    /// An answer found nowhere in the rollout.
    Noise,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub seed: u64,
    pub questions: usize,
    pub models: usize,
    pub rollouts_per_model: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            questions: 50,
            models: 3,
            rollouts_per_model: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCorpus {
    pub manifest: Vec<QuestionRecord>,
    /// Rollouts in file order.
    pub samples: Vec<IngestRecord>,
}

fn rollout(rng: &mut ChaCha8Rng, question: &str, kind: Kind, answer: &str, other: &str) -> String {
    let search = format!("{{\"name\": \"search\", \"arguments\": {{\"query\": \"{question}\"}}}}");
    let (result, thought) = match kind {
        Kind::Reference | Kind::Grounded => (format!("Records list {answer} among the results."), String::new()),
        Kind::ReasoningOnly => (format!("Records list {other}."), format!(" Perhaps it is {answer}.")),
        Kind::Noise => (format!("Records list {other}."), String::new()),
    };
    let calls = rng.random_range(1..=2);
    let mut b = TrajectoryBuilder::new(Dialect::Instruct).reasoning(&format!("I should search.{thought}"));
    for i in 0..calls {
        b = b.text("\n").tool_call(&search).text("\n");
        b = if i + 1 == calls {
            b.tool_response(&result)
        } else {
            b.tool_response("Nothing relevant.")
        };
    }
    let traj = b
        .text("\n")
        .answer(&AnswerBlock::new("Based on the search.", [answer]))
        .build()
        .expect("synthetic rollouts are well formed");
    serialize_trajectory(&traj, Dialect::Instruct).expect("built rollouts serialize")
}

/// Generate a corpus. Equal configs give identical corpora.
pub fn generate(cfg: &SynthConfig) -> SynthCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut manifest = Vec::with_capacity(cfg.questions);
    let mut samples = Vec::new();
    for qi in 0..cfg.questions {
        let question_id = format!("q{qi:03}");
        let picks: Vec<&str> = NAMES.choose_multiple(&mut rng, 5).copied().collect();
        let reference = format!("{} Hall", picks[0]);
        let alternatives = [format!("{} Hall", picks[1]), format!("{} Hall", picks[2])];
        let question = format!("Which hall hosted event {qi}?");
        let source_dataset = SOURCES[qi % SOURCES.len()].to_string();
        let key = if rng.random_bool(0.3) {
            AnswerKey::new(reference.clone(), [format!("{} H.", picks[0])])
        } else {
            AnswerKey::single(reference.clone())
        }
        .expect("synthetic names are non-empty");
        manifest.push(QuestionRecord {
            question_id: question_id.clone(),
            question: question.clone(),
            reference: key,
            source_dataset,
        });
        let ambiguous = rng.random_bool(0.6);
        for m in 0..cfg.models {
            for n in 0..cfg.rollouts_per_model {
                let kind = match rng.random_range(0..10) {
                    0..=3 => Kind::Reference,
                    4..=6 if ambiguous => Kind::Grounded,
                    4..=6 => Kind::Reference,
                    7..=8 => Kind::ReasoningOnly,
                    _ => Kind::Noise,
                };
                let answer = match kind {
                    Kind::Reference if rng.random_bool(0.3) => reference.to_uppercase(),
                    Kind::Reference => reference.clone(),
                    Kind::Grounded => {
                        let a = alternatives.choose(&mut rng).expect("two alternatives").clone();
                        if rng.random_bool(0.25) {
                            a.to_lowercase()
                        } else {
                            a
                        }
                    }
                    Kind::ReasoningOnly => format!("{} Hall", picks[3]),
                    Kind::Noise => format!("{} Hall", picks[4]),
                };
                // search results name some hall other than the answer
                let other = format!("{} Hall", if kind == Kind::Noise { picks[3] } else { picks[4] });
                let raw = rollout(&mut rng, &question, kind, &answer, &other);
                let mut extra = Map::new();
                extra.insert("trajectory_id".into(), Value::String(format!("{question_id}/m{m}/{n}")));
                samples.push(IngestRecord {
                    question_id: question_id.clone(),
                    question: question.clone(),
                    dialect: Dialect::Instruct,
                    raw,
                    terminated_cleanly: Some(true),
                    source_model: format!("m{m}"),
                    sampling_temperature: Some(1.0),
                    extra,
                });
            }
        }
    }
    SynthCorpus { manifest, samples }
}

impl SynthCorpus {
    /// Write `manifest.jsonl` and `samples.jsonl` under `dir`.
    pub fn write_to(&self, dir: &Path) -> Result<(PathBuf, PathBuf), PipelineError> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| PipelineError::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let manifest = dir.join("manifest.jsonl");
        let samples = dir.join("samples.jsonl");
        let lines = |items: Vec<String>| items.into_iter().map(|l| l + "\n").collect::<String>();
        let m = lines(self.manifest.iter().map(|r| serde_json::to_string(r).expect("encodes")).collect());
        let s = lines(self.samples.iter().map(|r| serde_json::to_string(r).expect("encodes")).collect());
        std::fs::write(&manifest, m).map_err(io(&manifest))?;
        std::fs::write(&samples, s).map_err(io(&samples))?;
        Ok((manifest, samples))
    }
}

/// Rule-based judges: `k` verifiers, verifier `i` demoting a seeded
/// `demotion_rate` share of its supported verdicts.
pub fn mock_judges(k: usize, demotion_rate: f64) -> Judges {
    let cfg = JudgeEndpointConfig::default();
    let gateway = |backend: MockBackend| Gateway::new(cfg.clone(), Arc::new(backend)).expect("default config is valid");
    Judges {
        equivalence: gateway(MockBackend::new()),
        verifiers: (0..k)
            .map(|i| gateway(MockBackend::with_demotion(i as u64 + 1, demotion_rate)))
            .collect(),
        grouping: gateway(MockBackend::new()),
    }
}
