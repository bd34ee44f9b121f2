use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::JudgeError;

/// Endpoint and retry settings for one judge role.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JudgeEndpointConfig {
    pub base_url: String,
    pub model_name: String,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Delay before the first retry; doubled on every further retry.
    pub backoff_base_ms: u64,
    /// Upper bound on requests in flight through one gateway.
    pub max_in_flight: usize,
    /// Environment variable holding a bearer token, if any.
    pub api_key_env: Option<String>,
}

impl Default for JudgeEndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "http://127.0.0.1:8000/v1".into(),
            model_name: "judge".into(),
            timeout_secs: 60.0,
            max_retries: 3,
            backoff_base_ms: 500,
            max_in_flight: 8,
            api_key_env: Some("ALTQA_JUDGE_API_KEY".into()),
        }
    }
}

impl JudgeEndpointConfig {
    pub fn validate(&self) -> Result<(), JudgeError> {
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return Err(JudgeError::InvalidInput(format!("timeout {} must be positive", self.timeout_secs)));
        }
        if self.max_in_flight == 0 {
            return Err(JudgeError::InvalidInput("max_in_flight must be at least 1".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Delay after the `failures`-th failed attempt (1-based).
    pub fn backoff(&self, failures: u32) -> Duration {
        let factor = 1u64.checked_shl(failures.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor))
    }
}
