//! Deterministic mock endpoint driven by a fixtures file.
//!
//! The file is a JSON object with an optional `default` response and a list
//! of `rules`; the first rule whose `contains` string occurs in the last
//! message of the request wins. No fixture and no default is an error, so
//! silent empty runs cannot happen by accident.

use std::fs;
use std::path::Path;

use nestweak_core::llm::{ChatRequest, ChatResponse};
use serde::Deserialize;

use super::{ChatEndpoint, EndpointError};
use crate::error::ToolError;

#[derive(Debug, Deserialize)]
struct MockFile {
    #[serde(default)]
    default: Option<String>,
    #[serde(default)]
    rules: Vec<MockRule>,
}

#[derive(Debug, Deserialize)]
struct MockRule {
    contains: String,
    response: String,
}

pub struct MockEndpoint {
    rules: Vec<(String, String)>,
    default: Option<String>,
}

impl MockEndpoint {
    pub fn new(rules: Vec<(String, String)>, default: Option<String>) -> MockEndpoint {
        MockEndpoint { rules, default }
    }

    pub fn from_file(path: &Path) -> Result<MockEndpoint, ToolError> {
        let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
        let parsed: MockFile = serde_json::from_str(&text)
            .map_err(|e| ToolError::format(path, 1, e.to_string()))?;
        Ok(MockEndpoint {
            rules: parsed
                .rules
                .into_iter()
                .map(|r| (r.contains, r.response))
                .collect(),
            default: parsed.default,
        })
    }
}

impl ChatEndpoint for MockEndpoint {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, EndpointError> {
        let content = request
            .messages
            .last()
            .map(|m| m.content.as_str())
            .unwrap_or("");
        let text = self
            .rules
            .iter()
            .find(|(needle, _)| content.contains(needle))
            .map(|(_, response)| response.clone())
            .or_else(|| self.default.clone())
            .ok_or(EndpointError::MissingFixture)?;
        Ok(ChatResponse {
            text,
            finish_reason: "stop".to_string(),
            latency_ms: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nestweak_core::llm::{ChatMessage, GenParams};

    fn request(content: &str) -> ChatRequest {
        ChatRequest {
            params: GenParams::default(),
            messages: vec![ChatMessage::user(content)],
        }
    }

    #[test]
    fn first_matching_rule_wins() {
        let mock = MockEndpoint::new(
            vec![
                ("Russia".to_string(), "first".to_string()),
                ("won".to_string(), "second".to_string()),
            ],
            Some("fallback".to_string()),
        );
        assert_eq!(mock.complete(&request("Text: Russia won.")).unwrap().text, "first");
        assert_eq!(mock.complete(&request("they won")).unwrap().text, "second");
        assert_eq!(mock.complete(&request("nothing")).unwrap().text, "fallback");
    }

    #[test]
    fn missing_fixture_is_an_error() {
        let mock = MockEndpoint::new(vec![], None);
        assert!(matches!(
            mock.complete(&request("x")),
            Err(EndpointError::MissingFixture)
        ));
    }

    #[test]
    fn loads_fixture_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mock.json");
        fs::write(
            &path,
            r#"{"default": "```{}```", "rules": [{"contains": "Russia", "response": "```{\"Russia\": \"COUNTRY\"}```"}]}"#,
        )
        .unwrap();
        let mock = MockEndpoint::from_file(&path).unwrap();
        assert!(mock.complete(&request("Text: Russia")).unwrap().text.contains("COUNTRY"));
        assert_eq!(mock.complete(&request("other")).unwrap().text, "```{}```");
    }
}
