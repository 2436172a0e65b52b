//! CoNLL-U reader for external token/sentence/dependency layers.
//!
//! Documents are separated with `# newdoc id = <doc_id>` comments. Token
//! forms are aligned against the document text greedily (only whitespace may
//! separate consecutive tokens), which recovers character offsets that
//! CoNLL-U itself does not carry. Multiword-token ranges and empty nodes are
//! skipped; a mention's syntactic root is its first token whose head lies
//! outside the mention.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nestweak_core::{Corpus, Document, Span};

use crate::error::ToolError;

#[derive(Debug, Clone, Default)]
pub struct ConlluSentence {
    pub forms: Vec<String>,
    /// 1-based head within the sentence; 0 is the artificial root.
    pub heads: Vec<usize>,
}

/// Parse a CoNLL-U file into per-document sentence lists.
pub fn parse_conllu(text: &str, origin: &Path) -> Result<BTreeMap<String, Vec<ConlluSentence>>, ToolError> {
    let mut out: BTreeMap<String, Vec<ConlluSentence>> = BTreeMap::new();
    let mut current_doc: Option<String> = None;
    let mut sentence = ConlluSentence::default();

    let mut flush = |doc: &Option<String>, sent: &mut ConlluSentence| -> Result<(), ToolError> {
        if sent.forms.is_empty() {
            return Ok(());
        }
        let doc_id = doc
            .clone()
            .ok_or_else(|| ToolError::format(origin, 0, "token line before any '# newdoc id ='"))?;
        out.entry(doc_id).or_default().push(std::mem::take(sent));
        Ok(())
    };

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            flush(&current_doc, &mut sentence)?;
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(id) = rest.strip_prefix("newdoc id =") {
                flush(&current_doc, &mut sentence)?;
                current_doc = Some(id.trim().to_string());
            }
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(ToolError::format(
                origin,
                line_no,
                format!("expected 10 tab-separated columns, got {}", cols.len()),
            ));
        }
        if cols[0].contains('-') || cols[0].contains('.') {
            continue; // multiword-token range or empty node
        }
        let head: usize = cols[6].parse().map_err(|_| {
            ToolError::format(origin, line_no, format!("bad HEAD column {:?}", cols[6]))
        })?;
        sentence.forms.push(cols[1].to_string());
        sentence.heads.push(head);
    }
    flush(&current_doc, &mut sentence)?;
    Ok(out)
}

pub fn read_conllu(path: &Path) -> Result<BTreeMap<String, Vec<ConlluSentence>>, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    parse_conllu(&text, path)
}

/// Align one document's sentences against its text, producing token spans,
/// sentence spans, and global head indices (None = root or out of sentence).
fn align_document(
    doc: &Document,
    sentences: &[ConlluSentence],
) -> Result<(Vec<Span>, Vec<Span>, Vec<Option<usize>>), ToolError> {
    let chars: Vec<char> = doc.text().chars().collect();
    let mut tokens: Vec<Span> = Vec::new();
    let mut sent_spans: Vec<Span> = Vec::new();
    let mut heads: Vec<Option<usize>> = Vec::new();
    let mut pos = 0usize;

    for sent in sentences {
        let sent_token_base = tokens.len();
        let mut first: Option<usize> = None;
        for form in &sent.forms {
            let form_chars: Vec<char> = form.chars().collect();
            while pos < chars.len() && chars[pos].is_whitespace() {
                pos += 1;
            }
            if pos + form_chars.len() > chars.len()
                || chars[pos..pos + form_chars.len()] != form_chars[..]
            {
                return Err(ToolError::Invalid(format!(
                    "{}: token {:?} does not align with the text at char {}",
                    doc.doc_id(),
                    form,
                    pos
                )));
            }
            if first.is_none() {
                first = Some(pos);
            }
            tokens.push(Span::new(pos, pos + form_chars.len()));
            pos += form_chars.len();
        }
        for &head in &sent.heads {
            heads.push(if head == 0 {
                None
            } else {
                Some(sent_token_base + head - 1)
            });
        }
        if let Some(start) = first {
            sent_spans.push(Span::new(start, pos));
        }
    }
    Ok((tokens, sent_spans, heads))
}

/// Attach token, sentence, and dependency-root layers from a CoNLL-U file to
/// every covered document of the corpus. Documents without a CoNLL-U entry
/// pass through unchanged.
pub fn attach_layers(
    corpus: &Corpus,
    layers: &BTreeMap<String, Vec<ConlluSentence>>,
) -> Result<Corpus, ToolError> {
    let mut docs = Vec::with_capacity(corpus.documents().len());
    for doc in corpus.documents() {
        let Some(sentences) = layers.get(doc.doc_id()) else {
            docs.push(doc.clone());
            continue;
        };
        let (tokens, sent_spans, heads) = align_document(doc, sentences)?;

        let mut roots: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for m in doc.mentions() {
            let inside: Vec<usize> = tokens
                .iter()
                .enumerate()
                .filter(|(_, t)| m.span().contains(**t))
                .map(|(i, _)| i)
                .collect();
            let root = inside.iter().copied().find(|&i| match heads[i] {
                None => true,
                Some(h) => !inside.contains(&h),
            });
            if let Some(r) = root {
                roots.insert((m.start(), m.end()), r);
            }
        }

        let rebuilt = Document::new(
            doc.doc_id(),
            doc.text(),
            doc.mentions().iter().map(|m| m.to_triple()).collect::<Vec<_>>(),
        )?
        .with_tokens(tokens)?
        .with_sentences(sent_spans)?
        .with_dep_roots(roots)?;
        docs.push(rebuilt);
    }
    Ok(Corpus::new(
        corpus.split_name(),
        docs,
        corpus.type_inventory().to_vec(),
    )?)
}
