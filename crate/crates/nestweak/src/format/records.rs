//! Corruption-record files: one JSON object per line carrying a document's
//! edits. The corrupted text is reconstructed from the original corpus, so
//! the file stays small and the "applying edits reproduces the corrupted
//! text" invariant is the constructor.

use std::fs;
use std::path::Path;

use nestweak_core::corruption::{apply_edits_to_text, CorruptionRecord, Edit};
use nestweak_core::Corpus;
use serde::{Deserialize, Serialize};

use crate::error::ToolError;

#[derive(Debug, Serialize, Deserialize)]
struct RecordLine {
    doc_id: String,
    edits: Vec<EditRecord>,
}

#[derive(Debug, Serialize, Deserialize)]
struct EditRecord {
    orig_start: usize,
    orig_end: usize,
    original: String,
    replacement: String,
    mention: (usize, usize),
}

pub fn records_to_jsonl(records: &[CorruptionRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let line = RecordLine {
            doc_id: r.doc_id.clone(),
            edits: r
                .edits
                .iter()
                .map(|e| EditRecord {
                    orig_start: e.orig_start,
                    orig_end: e.orig_end,
                    original: e.original.clone(),
                    replacement: e.replacement.clone(),
                    mention: e.mention_span,
                })
                .collect(),
        };
        out.push_str(&serde_json::to_string(&line).expect("record serializes"));
        out.push('\n');
    }
    out
}

pub fn write_records(path: &Path, records: &[CorruptionRecord]) -> Result<(), ToolError> {
    fs::write(path, records_to_jsonl(records)).map_err(|e| ToolError::io(path, e))
}

/// Read records back, rebuilding each corrupted text from the original
/// document.
pub fn read_records(path: &Path, original: &Corpus) -> Result<Vec<CorruptionRecord>, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: RecordLine = serde_json::from_str(line)
            .map_err(|e| ToolError::format(path, idx + 1, e.to_string()))?;
        let doc = original.document(&parsed.doc_id).ok_or_else(|| {
            ToolError::format(path, idx + 1, format!("unknown document {:?}", parsed.doc_id))
        })?;
        let edits: Vec<Edit> = parsed
            .edits
            .into_iter()
            .map(|e| Edit {
                orig_start: e.orig_start,
                orig_end: e.orig_end,
                original: e.original,
                replacement: e.replacement,
                mention_span: e.mention,
            })
            .collect();
        out.push(CorruptionRecord {
            doc_id: parsed.doc_id,
            corrupted_text: apply_edits_to_text(doc.text(), &edits),
            edits,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nestweak_core::corruption::{corrupt_document, CorruptionConfig, Position, Strategy, SymbolKind};
    use nestweak_core::Document;

    #[test]
    fn records_file_round_trips() {
        let doc = Document::new(
            "d",
            "Ministry of Foreign Affairs of Russia",
            vec![(0, 37, "ORGANIZATION".to_string())],
        )
        .unwrap();
        let corpus = Corpus::from_documents("s", vec![doc]).unwrap();
        let config = CorruptionConfig::new(SymbolKind::Letters, Position::End, Strategy::Late, 3);
        let record = corrupt_document(&corpus.documents()[0], &config).unwrap();

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("records.jsonl");
        write_records(&path, std::slice::from_ref(&record)).unwrap();
        let back = read_records(&path, &corpus).unwrap();
        assert_eq!(back, vec![record]);
    }
}
