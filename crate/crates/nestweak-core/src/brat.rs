//! Standoff annotation parsing and rendering (`.ann` text-bound lines).
//!
//! Only `T` lines are consumed: `T<id>\t<TYPE> <start> <end>\t<surface>`.
//! Relation, event, attribute and comment lines are skipped. Offsets are
//! character counts, and each line's surface column is verified against the
//! corresponding text slice; disagreements are reported, never corrected.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::types::{CharMap, Document, Span};

/// Parse one `.ann` / `.txt` pair into a document. The returned document has
/// an empty `doc_id`; callers set it with [`Document::with_doc_id`].
pub fn parse_brat(ann_text: &str, txt_text: &str) -> Result<Document, CoreError> {
    let map = CharMap::new(txt_text);
    let mut triples: Vec<(usize, usize, String)> = Vec::new();

    for (idx, line) in ann_text.lines().enumerate() {
        let line_no = idx + 1;
        if !line.starts_with('T') {
            continue;
        }
        let (_, rest) = line.split_once('\t').ok_or(CoreError::MalformedLine {
            line: line_no,
            detail: "expected tab after annotation id".to_string(),
        })?;
        let (meta, surface) = rest.split_once('\t').ok_or(CoreError::MalformedLine {
            line: line_no,
            detail: "expected tab before surface column".to_string(),
        })?;
        if meta.contains(';') {
            return Err(CoreError::DiscontinuousSpan { line: line_no });
        }
        let fields: Vec<&str> = meta.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(CoreError::MalformedLine {
                line: line_no,
                detail: alloc::format!("expected TYPE START END, got {} fields", fields.len()),
            });
        }
        let parse_offset = |s: &str| {
            s.parse::<usize>().map_err(|_| CoreError::MalformedLine {
                line: line_no,
                detail: alloc::format!("bad offset {s:?}"),
            })
        };
        let start = parse_offset(fields[1])?;
        let end = parse_offset(fields[2])?;
        let found = map
            .slice(Span::new(start, end))
            .filter(|_| start < end)
            .ok_or(CoreError::SpanOutOfBounds {
                doc_id: String::new(),
                start,
                end,
                len: map.char_len(),
            })?;
        if found != surface {
            return Err(CoreError::OffsetMismatch {
                doc_id: String::new(),
                start,
                end,
                expected: surface.to_string(),
                found: found.to_string(),
            });
        }
        triples.push((start, end, fields[0].to_string()));
    }

    Document::new("", txt_text, triples)
}

/// Render a document back to a `(ann, txt)` pair. Mentions come out in
/// sorted order with fresh `T` ids; parsing the result reproduces the
/// mention set exactly.
pub fn write_brat(doc: &Document) -> (String, String) {
    let mut ann = String::new();
    for (i, m) in doc.mentions().iter().enumerate() {
        ann.push_str(&alloc::format!(
            "T{}\t{} {} {}\t{}\n",
            i + 1,
            m.entity_type(),
            m.start(),
            m.end(),
            m.surface()
        ));
    }
    (ann, doc.text().to_string())
}
