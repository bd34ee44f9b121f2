use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

use altqa_judge::{
    ChatBackend, ChatRequest, EvidenceLabel, Gateway, JudgeEndpointConfig, JudgeError, MockBackend, ScriptedBackend,
    TransportError,
};
use proptest::prelude::*;

fn fast(max_retries: u32) -> JudgeEndpointConfig {
    JudgeEndpointConfig {
        max_retries,
        backoff_base_ms: 0,
        ..Default::default()
    }
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

const OK_REPLY: &str = "```json\n{\"rationale\": \"r\", \"judgement\": \"correct\"}\n```";

proptest! {
    #[test]
    fn attempts_are_min_failures_retries_plus_one(failures in 0u32..8, max_retries in 0u32..6, garbage in any::<bool>()) {
        let bad = || if garbage { Ok("no json here".to_string()) } else { Err(TransportError("down".into())) };
        let script = (0..failures).map(|_| bad()).chain(std::iter::once(Ok(OK_REPLY.to_string())));
        let counter = Arc::new(AtomicU64::new(0));
        let gw = Gateway::new(fast(max_retries), Arc::new(ScriptedBackend::new(script)))
            .unwrap()
            .with_attempt_counter(counter.clone());
        let result = gw.judge_equivalence("q", &strings(&["a"]), "a");
        prop_assert_eq!(counter.load(Ordering::SeqCst), (failures.min(max_retries) + 1) as u64);
        if failures <= max_retries {
            prop_assert!(result.unwrap().is_correct());
        } else {
            let err = result.unwrap_err();
            prop_assert_eq!(err.attempts(), Some(max_retries + 1));
            if garbage {
                prop_assert!(matches!(err, JudgeError::Unparseable { .. }), "{:?}", err);
            } else {
                prop_assert!(matches!(err, JudgeError::TransportFailure { .. }), "{:?}", err);
            }
        }
    }
}

#[test]
fn invalid_label_is_not_retried() {
    let reply = "```json\n{\"rationale\": \"r\", \"judgement\": \"maybe\"}\n```";
    let gw = Gateway::new(fast(3), Arc::new(ScriptedBackend::new([Ok(reply.to_string())]))).unwrap();
    let err = gw.judge_equivalence("q", &strings(&["a"]), "a").unwrap_err();
    assert!(matches!(err, JudgeError::MalformedVerdict(_)));
    assert_eq!(gw.attempts(), 1);
}

#[test]
fn backoff_is_exponential() {
    let cfg = JudgeEndpointConfig {
        max_retries: 3,
        backoff_base_ms: 20,
        ..Default::default()
    };
    let gw = Gateway::new(cfg, Arc::new(MockBackend::unavailable())).unwrap();
    let start = Instant::now();
    assert!(gw.verify_evidence("q", "x", "a").is_err());
    // 20 + 40 + 80 ms
    assert!(start.elapsed() >= Duration::from_millis(140));
    assert_eq!(gw.attempts(), 4);
}

#[test]
fn mock_equivalence_and_grouping() {
    let gw = Gateway::new(fast(0), Arc::new(MockBackend::new())).unwrap();
    assert!(gw.judge_equivalence("q", &strings(&["Five!"]), "five").unwrap().is_correct());
    assert!(!gw.judge_equivalence("q", &strings(&["five"]), "5").unwrap().is_correct());
    let g = gw.group_answers(&strings(&["X!", "x"])).unwrap();
    assert_eq!(g.groups, vec![strings(&["X!", "x"])]);
    assert!(matches!(gw.judge_equivalence("q", &[], "5"), Err(JudgeError::InvalidInput(_))));
    assert!(matches!(gw.group_answers(&[]), Err(JudgeError::InvalidInput(_))));
}

#[test]
fn grouping_that_drops_an_answer_is_rejected() {
    let reply = "```json\n[[\"2001 fiscal year\", \"fiscal year 2001\"]]\n```";
    let gw = Gateway::new(fast(2), Arc::new(ScriptedBackend::new([Ok(reply.to_string())]))).unwrap();
    let err = gw
        .group_answers(&strings(&["2001 fiscal year", "fiscal year 2001", "Paris"]))
        .unwrap_err();
    assert!(matches!(err, JudgeError::PartitionViolation(_)));
    assert_eq!(gw.attempts(), 1);
}

#[test]
fn prompts_carry_the_inputs() {
    let backend = Arc::new(ScriptedBackend::new([Ok(
        "{\"verdict\": \"SUPPORTED\", \"claims_analysis\": []}".to_string()
    )]));
    let gw = Gateway::new(fast(0), backend.clone()).unwrap();
    let v = gw.verify_evidence("Who?", "<think>t</think>", "A").unwrap();
    assert_eq!(v.verdict, EvidenceLabel::Supported);
    let prompt = &backend.prompts()[0];
    assert!(prompt.starts_with("You are an Evidence-Consistency Judge."));
    assert!(prompt.contains("Question:\nWho?\n\nRollout:\n<think>t</think>\n"));
}

#[test]
fn mock_verdicts_are_deterministic_across_threads() {
    let gw = Arc::new(Gateway::new(fast(0), Arc::new(MockBackend::with_demotion(11, 0.5))).unwrap());
    let rollout = "<think>a</think><tool_call>q</tool_call><tool_response>alpha beta gamma</tool_response>";
    let run = |gw: Arc<Gateway>| {
        ["alpha", "beta", "gamma", "delta"]
            .iter()
            .map(|a| gw.verify_evidence("q", rollout, a).unwrap().verdict)
            .collect::<Vec<_>>()
    };
    let expected = run(gw.clone());
    let threads: Vec<_> = (0..8).map(|_| {
        let gw = gw.clone();
        std::thread::spawn(move || run(gw))
    }).collect();
    for t in threads {
        assert_eq!(t.join().unwrap(), expected);
    }
}

/// Tracks the peak number of concurrent calls.
struct Slow {
    current: AtomicUsize,
    peak: AtomicUsize,
}

impl ChatBackend for Slow {
    fn complete(&self, _: &ChatRequest<'_>) -> Result<String, TransportError> {
        let now = self.current.fetch_add(1, Ordering::SeqCst) + 1;
        self.peak.fetch_max(now, Ordering::SeqCst);
        std::thread::sleep(Duration::from_millis(20));
        self.current.fetch_sub(1, Ordering::SeqCst);
        Ok(OK_REPLY.to_string())
    }
}

#[test]
fn in_flight_requests_are_bounded() {
    let backend = Arc::new(Slow {
        current: AtomicUsize::new(0),
        peak: AtomicUsize::new(0),
    });
    let cfg = JudgeEndpointConfig {
        max_in_flight: 3,
        ..fast(0)
    };
    let gw = Arc::new(Gateway::new(cfg, backend.clone()).unwrap());
    let threads: Vec<_> = (0..12)
        .map(|_| {
            let gw = gw.clone();
            std::thread::spawn(move || gw.judge_equivalence("q", &["a".to_string()], "a").unwrap())
        })
        .collect();
    for t in threads {
        t.join().unwrap();
    }
    let peak = backend.peak.load(Ordering::SeqCst);
    assert!(peak <= 3 && peak >= 2, "peak {peak}");
}
