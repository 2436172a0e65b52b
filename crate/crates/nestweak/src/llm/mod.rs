//! Chat endpoints and run orchestration: a blocking OpenAI-compatible HTTP
//! client, a deterministic mock for tests and offline work, an append-only
//! transcript store with a replay endpoint, and the pure/hybrid pipeline
//! drivers with bounded parallelism and retries.

use nestweak_core::llm::{ChatRequest, ChatResponse};

use crate::provenance::sha256_hex;

pub mod http;
pub mod mock;
pub mod run;
pub mod transcript;

pub use http::HttpEndpoint;
pub use mock::MockEndpoint;
pub use run::{run_hybrid, run_pure, Granularity, RunOptions, RunReport};
pub use transcript::{ReplayEndpoint, TranscriptWriter};

#[derive(Debug, thiserror::Error)]
pub enum EndpointError {
    #[error("http status {status}: {detail}")]
    Http { status: u16, detail: String },
    #[error("transport: {0}")]
    Transport(String),
    #[error("malformed endpoint response: {0}")]
    BadResponse(String),
    #[error("no mock fixture matches the request")]
    MissingFixture,
    #[error("transcript has no entry for request key {0}")]
    MissingTranscript(String),
}

/// A chat-completions backend. Implementations must be safe to call from
/// multiple worker threads.
pub trait ChatEndpoint: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError>;
}

/// The wire payload for an OpenAI-compatible `/chat/completions` call.
/// Key order is canonical (sorted), so the serialized form is stable and
/// hashable.
pub fn request_payload(request: &ChatRequest) -> serde_json::Value {
    serde_json::json!({
        "model": request.params.model,
        "messages": request
            .messages
            .iter()
            .map(|m| serde_json::json!({"role": m.role, "content": m.content}))
            .collect::<Vec<_>>(),
        "temperature": request.params.temperature,
        "top_p": request.params.top_p,
        "max_tokens": request.params.max_tokens,
        "repetition_penalty": request.params.repetition_penalty,
    })
}

/// Content hash identifying a request in transcripts.
pub fn request_key(request: &ChatRequest) -> String {
    let payload = request_payload(request).to_string();
    sha256_hex(payload.as_bytes())
}
