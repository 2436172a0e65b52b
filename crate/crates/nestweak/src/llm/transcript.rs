//! Append-only request/response transcripts keyed by content hash, plus the
//! replay endpoint that serves a prior run back without any network.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use nestweak_core::llm::{ChatRequest, ChatResponse};
use serde::{Deserialize, Serialize};

use super::{request_key, ChatEndpoint, EndpointError};
use crate::error::ToolError;

#[derive(Debug, Serialize, Deserialize)]
struct TranscriptLine {
    key: String,
    request: serde_json::Value,
    response: ResponseRecord,
}

#[derive(Debug, Serialize, Deserialize)]
struct ResponseRecord {
    text: String,
    finish_reason: String,
    latency_ms: u64,
}

/// Appends one JSON line per completed request; writes are serialized and
/// flushed so a crashed run leaves a usable prefix.
pub struct TranscriptWriter {
    file: Mutex<fs::File>,
}

impl TranscriptWriter {
    pub fn create(path: &Path) -> Result<TranscriptWriter, ToolError> {
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| ToolError::io(path, e))?;
        Ok(TranscriptWriter {
            file: Mutex::new(file),
        })
    }

    pub fn append(&self, request: &ChatRequest, response: &ChatResponse) -> Result<(), ToolError> {
        let line = TranscriptLine {
            key: request_key(request),
            request: super::request_payload(request),
            response: ResponseRecord {
                text: response.text.clone(),
                finish_reason: response.finish_reason.clone(),
                latency_ms: response.latency_ms,
            },
        };
        let mut file = self.file.lock().expect("transcript lock");
        let rendered = serde_json::to_string(&line).expect("transcript line serializes");
        writeln!(file, "{rendered}").map_err(|e| ToolError::Io {
            path: "<transcript>".to_string(),
            source: e,
        })?;
        file.flush().map_err(|e| ToolError::Io {
            path: "<transcript>".to_string(),
            source: e,
        })
    }
}

/// Load a transcript into a key -> response map (last entry wins).
pub fn load_transcript(path: &Path) -> Result<HashMap<String, ChatResponse>, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    let mut map = HashMap::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: TranscriptLine = serde_json::from_str(line)
            .map_err(|e| ToolError::format(path, idx + 1, e.to_string()))?;
        map.insert(
            parsed.key,
            ChatResponse {
                text: parsed.response.text,
                finish_reason: parsed.response.finish_reason,
                latency_ms: parsed.response.latency_ms,
            },
        );
    }
    Ok(map)
}

/// Serves recorded responses by request hash; unknown requests fail loudly.
pub struct ReplayEndpoint {
    map: HashMap<String, ChatResponse>,
}

impl ReplayEndpoint {
    pub fn from_file(path: &Path) -> Result<ReplayEndpoint, ToolError> {
        Ok(ReplayEndpoint {
            map: load_transcript(path)?,
        })
    }
}

impl ChatEndpoint for ReplayEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let key = request_key(request);
        self.map
            .get(&key)
            .cloned()
            .ok_or(EndpointError::MissingTranscript(key))
    }
}

/// Wraps an endpoint and records every successful completion.
pub struct RecordingEndpoint<'a> {
    inner: &'a dyn ChatEndpoint,
    writer: &'a TranscriptWriter,
}

impl<'a> RecordingEndpoint<'a> {
    pub fn new(inner: &'a dyn ChatEndpoint, writer: &'a TranscriptWriter) -> RecordingEndpoint<'a> {
        RecordingEndpoint { inner, writer }
    }
}

impl ChatEndpoint for RecordingEndpoint<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let response = self.inner.complete(request)?;
        self.writer
            .append(request, &response)
            .map_err(|e| EndpointError::Transport(format!("transcript write failed: {e}")))?;
        Ok(response)
    }
}
