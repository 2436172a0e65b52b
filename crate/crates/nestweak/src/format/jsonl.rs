//! The canonical corpus format: one JSON object per line, one document per
//! object, mentions as `[start, end, type]` triples. An optional first line
//! holds corpus-level data (split name, type inventory, provenance) under a
//! single `nestweak` key; readers accept bare document lines too and infer
//! the inventory.

use std::fs;
use std::path::Path;

use nestweak_core::{Corpus, Document, Span};
use serde::{Deserialize, Serialize};

use crate::error::ToolError;
use crate::provenance::Provenance;

#[derive(Debug, Serialize, Deserialize)]
struct DocRecord {
    doc_id: String,
    text: String,
    mentions: Vec<(usize, usize, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tokens: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sentences: Option<Vec<(usize, usize)>>,
    /// (mention_start, mention_end, token_index)
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dep_roots: Option<Vec<(usize, usize, usize)>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct HeaderLine {
    nestweak: Header,
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    split: String,
    types: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
}

fn doc_record(doc: &Document) -> DocRecord {
    DocRecord {
        doc_id: doc.doc_id().to_string(),
        text: doc.text().to_string(),
        mentions: doc.mentions().iter().map(|m| m.to_triple()).collect(),
        tokens: doc
            .tokens()
            .map(|ts| ts.iter().map(|s| (s.start, s.end)).collect()),
        sentences: doc
            .sentences()
            .map(|ts| ts.iter().map(|s| (s.start, s.end)).collect()),
        dep_roots: doc
            .dep_roots()
            .map(|m| m.iter().map(|(&(s, e), &t)| (s, e, t)).collect()),
    }
}

fn build_document(record: DocRecord) -> Result<Document, ToolError> {
    let mut doc = Document::new(record.doc_id, record.text, record.mentions)?;
    if let Some(tokens) = record.tokens {
        doc = doc.with_tokens(tokens.into_iter().map(|(s, e)| Span::new(s, e)).collect())?;
    }
    if let Some(sents) = record.sentences {
        doc = doc.with_sentences(sents.into_iter().map(|(s, e)| Span::new(s, e)).collect())?;
    }
    if let Some(roots) = record.dep_roots {
        doc = doc.with_dep_roots(roots.into_iter().map(|(s, e, t)| ((s, e), t)).collect())?;
    }
    Ok(doc)
}

/// Serialize a corpus to the JSONL string form (header line included).
pub fn corpus_to_jsonl(corpus: &Corpus, provenance: Option<&Provenance>) -> String {
    let header = HeaderLine {
        nestweak: Header {
            format: "corpus".to_string(),
            version: 1,
            split: corpus.split_name().to_string(),
            types: corpus.type_inventory().to_vec(),
            provenance: provenance.cloned(),
        },
    };
    let mut out = serde_json::to_string(&header).expect("header serializes");
    out.push('\n');
    for doc in corpus.documents() {
        out.push_str(&serde_json::to_string(&doc_record(doc)).expect("document serializes"));
        out.push('\n');
    }
    out
}

/// Parse the JSONL string form. `origin` names the source in errors.
pub fn corpus_from_jsonl(text: &str, origin: &Path) -> Result<Corpus, ToolError> {
    let mut split = String::new();
    let mut types: Option<Vec<String>> = None;
    let mut docs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if idx == 0 && trimmed.contains("\"nestweak\"") {
            if let Ok(header) = serde_json::from_str::<HeaderLine>(trimmed) {
                split = header.nestweak.split;
                types = Some(header.nestweak.types);
                continue;
            }
        }
        let record: DocRecord = serde_json::from_str(trimmed)
            .map_err(|e| ToolError::format(origin, line_no, e.to_string()))?;
        docs.push(build_document(record)?);
    }
    match types {
        Some(types) => Ok(Corpus::new(split, docs, types)?),
        None => Ok(Corpus::from_documents(split, docs)?),
    }
}

pub fn write_corpus(
    path: &Path,
    corpus: &Corpus,
    provenance: Option<&Provenance>,
) -> Result<(), ToolError> {
    fs::write(path, corpus_to_jsonl(corpus, provenance)).map_err(|e| ToolError::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Corpus, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    corpus_from_jsonl(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn sample() -> Corpus {
        let d1 = Document::new(
            "a",
            "Russia won.",
            vec![(0, 6, "COUNTRY".to_string())],
        )
        .unwrap()
        .with_tokens(vec![Span::new(0, 6), Span::new(7, 10)])
        .unwrap()
        .with_sentences(vec![Span::new(0, 11)])
        .unwrap()
        .with_dep_roots(BTreeMap::from([((0, 6), 0)]))
        .unwrap();
        let d2 = Document::new("b", "Пример текста", Vec::new()).unwrap();
        Corpus::new(
            "train",
            vec![d1, d2],
            vec!["COUNTRY".to_string(), "EVENT".to_string()],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_preserves_everything() {
        let corpus = sample();
        let text = corpus_to_jsonl(&corpus, None);
        let back = corpus_from_jsonl(&text, Path::new("test.jsonl")).unwrap();
        assert_eq!(back, corpus);
    }

    #[test]
    fn header_carries_split_and_inventory() {
        let text = corpus_to_jsonl(&sample(), None);
        let first = text.lines().next().unwrap();
        assert!(first.contains("\"nestweak\""));
        assert!(first.contains("\"split\":\"train\""));
        assert!(first.contains("EVENT"));
    }

    #[test]
    fn bare_jsonl_without_header_loads() {
        let text = r#"{"doc_id":"x","text":"Russia","mentions":[[0,6,"COUNTRY"]]}"#;
        let corpus = corpus_from_jsonl(text, Path::new("bare.jsonl")).unwrap();
        assert_eq!(corpus.documents().len(), 1);
        assert_eq!(corpus.type_inventory(), ["COUNTRY".to_string()]);
    }

    #[test]
    fn parse_error_reports_line_number() {
        let text = "{\"doc_id\":\"x\",\"text\":\"y\",\"mentions\":[]}\nnot json\n";
        let err = corpus_from_jsonl(text, Path::new("bad.jsonl")).unwrap_err();
        match err {
            ToolError::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn deterministic_serialization() {
        let corpus = sample();
        assert_eq!(corpus_to_jsonl(&corpus, None), corpus_to_jsonl(&corpus, None));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.jsonl");
        let corpus = sample();
        let prov = Provenance::new("nestweak test", None);
        write_corpus(&path, &corpus, Some(&prov)).unwrap();
        let back = read_corpus(&path).unwrap();
        assert_eq!(back, corpus);
    }
}
