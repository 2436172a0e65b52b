//! Shipped prompt assets: the base instruction template, per-type nesting
//! patterns, and per-type definitions. Defaults are embedded in the binary;
//! each can be overridden with a file on disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::ToolError;

pub const DEFAULT_PROMPT_TEMPLATE: &str = include_str!("../assets/prompt_base.txt");
pub const DEFAULT_NESTING_PATTERNS: &str = include_str!("../assets/nesting_patterns.txt");
pub const DEFAULT_TYPE_DEFINITIONS: &str = include_str!("../assets/type_definitions.tsv");

/// Parse the nesting-pattern asset: blocks starting `For class <TYPE> ...`,
/// each running until the next block. Returns type -> full block text.
pub fn parse_nesting_patterns(text: &str) -> BTreeMap<String, String> {
    let mut out: BTreeMap<String, String> = BTreeMap::new();
    let mut current: Option<(String, Vec<&str>)> = None;
    for line in text.lines() {
        if let Some(rest) = line.strip_prefix("For class ") {
            if let Some((ty, lines)) = current.take() {
                out.insert(ty, lines.join("\n").trim().to_string());
            }
            let ty = rest.split_whitespace().next().unwrap_or("").to_string();
            current = Some((ty, vec![line]));
        } else if let Some((_, lines)) = current.as_mut() {
            lines.push(line);
        }
    }
    if let Some((ty, lines)) = current.take() {
        out.insert(ty, lines.join("\n").trim().to_string());
    }
    out
}

/// Parse the definitions asset: `TYPE<TAB>definition` lines, `#` comments.
pub fn parse_type_definitions(text: &str) -> Result<BTreeMap<String, String>, ToolError> {
    let mut out = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (ty, def) = line.split_once('\t').ok_or_else(|| {
            ToolError::Invalid(format!(
                "definitions line {}: expected TYPE<TAB>definition",
                idx + 1
            ))
        })?;
        out.insert(ty.trim().to_string(), def.trim().to_string());
    }
    Ok(out)
}

pub fn load_template(path: Option<&Path>) -> Result<String, ToolError> {
    match path {
        Some(p) => fs::read_to_string(p).map_err(|e| ToolError::io(p, e)),
        None => Ok(DEFAULT_PROMPT_TEMPLATE.to_string()),
    }
}

pub fn load_nesting_patterns(path: Option<&Path>) -> Result<BTreeMap<String, String>, ToolError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| ToolError::io(p, e))?,
        None => DEFAULT_NESTING_PATTERNS.to_string(),
    };
    Ok(parse_nesting_patterns(&text))
}

pub fn load_type_definitions(path: Option<&Path>) -> Result<BTreeMap<String, String>, ToolError> {
    let text = match path {
        Some(p) => fs::read_to_string(p).map_err(|e| ToolError::io(p, e))?,
        None => DEFAULT_TYPE_DEFINITIONS.to_string(),
    };
    parse_type_definitions(&text)
}
