use serde_json::{json, Value};

use crate::config::JudgeEndpointConfig;
use crate::gateway::{ChatBackend, ChatRequest, TransportError};

/// Chat-completions client: the prompt goes out as a single user message
/// and the first choice's content comes back.
pub struct HttpBackend {
    agent: ureq::Agent,
    url: String,
    model: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(cfg: &JudgeEndpointConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let api_key = cfg
            .api_key_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .filter(|k| !k.is_empty());
        Self {
            agent,
            url: format!("{}/chat/completions", cfg.base_url.trim_end_matches('/')),
            model: cfg.model_name.clone(),
            api_key,
        }
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl ChatBackend for HttpBackend {
    fn complete(&self, request: &ChatRequest<'_>) -> Result<String, TransportError> {
        let body = json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": request.prompt }],
            "temperature": 0.0,
        });
        let mut call = self.agent.post(&self.url);
        if let Some(key) = &self.api_key {
            call = call.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = call.send_json(&body).map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))?;
        if !status.is_success() {
            let head: String = text.chars().take(200).collect();
            return Err(TransportError(format!("HTTP {status}: {head}")));
        }
        let value: Value = serde_json::from_str(&text).map_err(|e| TransportError(format!("response body: {e}")))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| TransportError("response has no choices[0].message.content".into()))
    }
}
