use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Condvar, Mutex};

use serde::{Deserialize, Serialize};

use crate::config::JudgeEndpointConfig;
use crate::http::HttpBackend;
use crate::prompt;
use crate::response::{self, ReplyError};
use crate::verdict::{EquivalenceVerdict, EvidenceVerdict, GroupingResult};
use crate::JudgeError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JudgeRole {
    Equivalence,
    Evidence,
    Grouping,
}

/// The structured arguments behind a prompt. Remote backends only read the
/// rendered prompt; offline backends answer from these fields.
#[derive(Debug, Clone, Copy)]
pub enum JudgeInput<'a> {
    Equivalence {
        question: &'a str,
        gold: &'a [String],
        prediction: &'a str,
    },
    Evidence {
        question: &'a str,
        rollout_text: &'a str,
        answer: &'a str,
    },
    Grouping {
        answers: &'a [String],
    },
}

impl JudgeInput<'_> {
    pub fn role(&self) -> JudgeRole {
        match self {
            Self::Equivalence { .. } => JudgeRole::Equivalence,
            Self::Evidence { .. } => JudgeRole::Evidence,
            Self::Grouping { .. } => JudgeRole::Grouping,
        }
    }

    fn render(&self) -> String {
        match *self {
            Self::Equivalence {
                question,
                gold,
                prediction,
            } => prompt::equivalence_prompt(question, gold, prediction),
            Self::Evidence {
                question, rollout_text, ..
            } => prompt::evidence_prompt(question, rollout_text),
            Self::Grouping { answers } => prompt::grouping_prompt(answers),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ChatRequest<'a> {
    pub role: JudgeRole,
    pub prompt: &'a str,
    pub input: &'a JudgeInput<'a>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{0}")]
pub struct TransportError(pub String);

/// Something that turns a single-message chat request into reply text.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError>;
}

/// Counting semaphore bounding concurrent backend calls.
struct Permits {
    free: Mutex<usize>,
    released: Condvar,
}

struct Permit<'a>(&'a Permits);

impl Permits {
    fn new(n: usize) -> Self {
        Self {
            free: Mutex::new(n),
            released: Condvar::new(),
        }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.released.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.released.notify_one();
    }
}

/// Judge client for one endpoint. Shareable across threads.
pub struct Gateway {
    cfg: JudgeEndpointConfig,
    backend: Arc<dyn ChatBackend>,
    permits: Permits,
    attempts: Arc<AtomicU64>,
}

impl Gateway {
    pub fn new(cfg: JudgeEndpointConfig, backend: Arc<dyn ChatBackend>) -> Result<Self, JudgeError> {
        cfg.validate()?;
        Ok(Self {
            permits: Permits::new(cfg.max_in_flight),
            cfg,
            backend,
            attempts: Arc::new(AtomicU64::new(0)),
        })
    }

    /// Gateway over the chat-completions endpoint named in `cfg`.
    pub fn http(cfg: JudgeEndpointConfig) -> Result<Self, JudgeError> {
        let backend = Arc::new(HttpBackend::new(&cfg));
        Self::new(cfg, backend)
    }

    /// Count every backend attempt into `counter` as well.
    pub fn with_attempt_counter(mut self, counter: Arc<AtomicU64>) -> Self {
        self.attempts = counter;
        self
    }

    pub fn attempts(&self) -> u64 {
        self.attempts.load(Ordering::SeqCst)
    }

    pub fn config(&self) -> &JudgeEndpointConfig {
        &self.cfg
    }

    /// Send one request, retrying transport failures and unparseable
    /// replies with exponential backoff. A reply that parses but carries an
    /// invalid label is returned as an error straight away.
    fn call<T>(&self, input: JudgeInput<'_>, parse: fn(&str) -> Result<T, ReplyError>) -> Result<T, JudgeError> {
        let prompt = input.render();
        let request = ChatRequest {
            role: input.role(),
            prompt: &prompt,
            input: &input,
        };
        let mut failures = 0u32;
        loop {
            self.attempts.fetch_add(1, Ordering::SeqCst);
            let reply = {
                let _permit = self.permits.acquire();
                self.backend.complete(&request)
            };
            let error = match reply {
                Ok(text) => match parse(&text) {
                    Ok(v) => return Ok(v),
                    Err(ReplyError::Malformed(m)) => return Err(JudgeError::MalformedVerdict(m)),
                    Err(ReplyError::Unparseable(message)) => JudgeError::Unparseable {
                        attempts: failures + 1,
                        message,
                    },
                },
                Err(TransportError(message)) => JudgeError::TransportFailure {
                    attempts: failures + 1,
                    message,
                },
            };
            failures += 1;
            if failures > self.cfg.max_retries {
                return Err(error);
            }
            let delay = self.cfg.backoff(failures);
            log::debug!("{:?} judge attempt {failures} failed ({error}); retrying in {delay:?}", request.role);
            std::thread::sleep(delay);
        }
    }

    pub fn judge_equivalence(
        &self,
        question: &str,
        gold: &[String],
        prediction: &str,
    ) -> Result<EquivalenceVerdict, JudgeError> {
        if gold.is_empty() {
            return Err(JudgeError::InvalidInput("gold answer list is empty".into()));
        }
        self.call(
            JudgeInput::Equivalence {
                question,
                gold,
                prediction,
            },
            response::parse_equivalence,
        )
    }

    pub fn verify_evidence(&self, question: &str, rollout_text: &str, answer: &str) -> Result<EvidenceVerdict, JudgeError> {
        self.call(
            JudgeInput::Evidence {
                question,
                rollout_text,
                answer,
            },
            response::parse_evidence,
        )
    }

    /// Group answers into equivalence classes. The reply must partition the
    /// input exactly; anything else is a `PartitionViolation`.
    pub fn group_answers(&self, answers: &[String]) -> Result<GroupingResult, JudgeError> {
        if answers.is_empty() {
            return Err(JudgeError::InvalidInput("no answers to group".into()));
        }
        let result = self.call(JudgeInput::Grouping { answers }, response::parse_grouping)?;
        result.validate_partition(answers)?;
        Ok(result)
    }
}
