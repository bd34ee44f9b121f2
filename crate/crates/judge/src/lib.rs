//! Clients for the three judge roles used when mining alternative answers:
//! answer equivalence, evidence verification and answer grouping.
//!
//! A [`Gateway`] renders the role's prompt, sends it through a
//! [`ChatBackend`], extracts the fenced JSON reply and validates it. The
//! HTTP backend talks to a chat-completions endpoint; [`MockBackend`]
//! answers from the structured inputs with fixed rules and is meant for
//! offline tests only.

mod config;
mod gateway;
mod http;
mod mock;
pub mod prompt;
mod response;
mod verdict;

pub use config::JudgeEndpointConfig;
pub use gateway::{ChatBackend, ChatRequest, Gateway, JudgeInput, JudgeRole, TransportError};
pub use http::HttpBackend;
pub use mock::{MockBackend, ScriptedBackend};
pub use response::extract_fenced_block;
pub use verdict::{ClaimAnalysis, EquivalenceVerdict, EvidenceLabel, EvidenceVerdict, GroupingResult, Judgement};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum JudgeError {
    #[error("transport failed after {attempts} attempts: {message}")]
    TransportFailure { attempts: u32, message: String },
    #[error("unparseable response after {attempts} attempts: {message}")]
    Unparseable { attempts: u32, message: String },
    #[error("malformed verdict: {0}")]
    MalformedVerdict(String),
    #[error("grouping is not a partition of the input: {0}")]
    PartitionViolation(String),
    #[error("invalid judge input: {0}")]
    InvalidInput(String),
}

impl JudgeError {
    /// Attempts spent on the call that produced this error, when known.
    pub fn attempts(&self) -> Option<u32> {
        match self {
            Self::TransportFailure { attempts, .. } | Self::Unparseable { attempts, .. } => Some(*attempts),
            _ => None,
        }
    }
}
