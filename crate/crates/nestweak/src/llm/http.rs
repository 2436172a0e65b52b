//! Blocking HTTP endpoint for any OpenAI-compatible chat-completions server.

use std::time::{Duration, Instant};

use nestweak_core::llm::{ChatRequest, ChatResponse};

use super::{request_payload, ChatEndpoint, EndpointError};

pub struct HttpEndpoint {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpEndpoint {
    /// `base_url` is the API root (e.g. `http://localhost:8000/v1`); the
    /// `/chat/completions` suffix is appended here. The key, when given, is
    /// sent as a bearer token.
    pub fn new(base_url: &str, api_key: Option<String>) -> HttpEndpoint {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(300)))
            .build()
            .new_agent();
        HttpEndpoint {
            url: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            api_key,
            agent,
        }
    }
}

impl ChatEndpoint for HttpEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let started = Instant::now();
        let mut builder = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json");
        if let Some(key) = &self.api_key {
            builder = builder.header("authorization", format!("Bearer {key}"));
        }
        let mut response = builder
            .send_json(request_payload(request))
            .map_err(|e| match e {
                ureq::Error::StatusCode(status) => EndpointError::Http {
                    status,
                    detail: "non-success status".to_string(),
                },
                other => EndpointError::Transport(other.to_string()),
            })?;
        let value: serde_json::Value = response
            .body_mut()
            .read_json()
            .map_err(|e| EndpointError::BadResponse(e.to_string()))?;
        let message = &value["choices"][0];
        let text = message["message"]["content"]
            .as_str()
            .ok_or_else(|| EndpointError::BadResponse("missing choices[0].message.content".to_string()))?
            .to_string();
        let finish_reason = message["finish_reason"].as_str().unwrap_or("unknown").to_string();
        Ok(ChatResponse {
            text,
            finish_reason,
            latency_ms: started.elapsed().as_millis() as u64,
        })
    }
}
