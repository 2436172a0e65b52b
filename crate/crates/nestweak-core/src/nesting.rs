//! Flat conversion and nesting statistics.
//!
//! Flattening keeps exactly the mentions that are not strictly contained in
//! another mention of the same document. Same-span mentions with different
//! types do not contain each other strictly, so both survive as outer.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::types::{Corpus, Document, Mention};

/// Check that no two mentions of the document overlap unless span-equal.
/// Returns the first offending pair otherwise.
pub fn flatness_violation(doc: &Document) -> Option<(&Mention, &Mention)> {
    let ms = doc.mentions();
    for (i, a) in ms.iter().enumerate() {
        for b in &ms[i + 1..] {
            if b.start() >= a.end() {
                break; // sorted by start; nothing later can overlap a
            }
            if a.span() != b.span() && a.span().overlaps(b.span()) {
                return Some((a, b));
            }
        }
    }
    None
}

pub(crate) fn not_flat_error(doc: &Document, a: &Mention, b: &Mention) -> CoreError {
    CoreError::NotFlat {
        doc_id: doc.doc_id().to_string(),
        a_start: a.start(),
        a_end: a.end(),
        a_type: a.entity_type().to_string(),
        b_start: b.start(),
        b_end: b.end(),
        b_type: b.entity_type().to_string(),
    }
}

fn strictly_contained(m: &Mention, all: &[Mention]) -> bool {
    all.iter().any(|o| o.span().strictly_contains(m.span()))
}

/// Keep only the outermost mentions of every document.
///
/// Idempotent; the output is overlap-free apart from span-equal pairs. If two
/// surviving mentions partially overlap without either containing the other,
/// no consistent flat annotation exists and `CrossingSpans` is returned.
pub fn flatten(corpus: &Corpus) -> Result<Corpus, CoreError> {
    let mut docs = Vec::with_capacity(corpus.documents().len());
    for doc in corpus.documents() {
        let survivors: Vec<&Mention> = doc
            .mentions()
            .iter()
            .filter(|m| !strictly_contained(m, doc.mentions()))
            .collect();
        for (i, a) in survivors.iter().enumerate() {
            for b in &survivors[i + 1..] {
                if b.start() >= a.end() {
                    break;
                }
                if a.span() != b.span() && a.span().overlaps(b.span()) {
                    return Err(CoreError::CrossingSpans {
                        doc_id: doc.doc_id().to_string(),
                        a_start: a.start(),
                        a_end: a.end(),
                        a_type: a.entity_type().to_string(),
                        b_start: b.start(),
                        b_end: b.end(),
                        b_type: b.entity_type().to_string(),
                    });
                }
            }
        }
        let surviving_spans: Vec<(usize, usize)> =
            survivors.iter().map(|m| (m.start(), m.end())).collect();
        let triples: Vec<(usize, usize, String)> =
            survivors.iter().map(|m| m.to_triple()).collect();
        let mut rebuilt = Document::new(doc.doc_id(), doc.text(), triples)?;
        if let Some(tokens) = doc.tokens() {
            rebuilt = rebuilt.with_tokens(tokens.to_vec())?;
        }
        if let Some(sents) = doc.sentences() {
            rebuilt = rebuilt.with_sentences(sents.to_vec())?;
        }
        if let Some(roots) = doc.dep_roots() {
            let kept: BTreeMap<(usize, usize), usize> = roots
                .iter()
                .filter(|(span, _)| surviving_spans.contains(span))
                .map(|(&k, &v)| (k, v))
                .collect();
            rebuilt = rebuilt.with_dep_roots(kept)?;
        }
        docs.push(rebuilt);
    }
    Corpus::new(
        corpus.split_name(),
        docs,
        corpus.type_inventory().to_vec(),
    )
}

/// Per-type mention counts split by containment.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TypeCounts {
    pub total: usize,
    pub inner: usize,
    pub outer: usize,
}

/// Corpus-level nesting report: totals, per-type counts, and a histogram of
/// nesting depth (1 = outermost).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub documents: usize,
    pub total: usize,
    pub inner: usize,
    pub outer: usize,
    pub per_type: BTreeMap<String, TypeCounts>,
    pub depth_histogram: BTreeMap<usize, usize>,
}

/// Count total/inner/outer mentions per type plus the depth histogram.
/// A mention is inner here iff some other mention strictly contains it.
pub fn corpus_stats(corpus: &Corpus) -> CorpusStats {
    let mut stats = CorpusStats {
        documents: corpus.documents().len(),
        ..CorpusStats::default()
    };
    for doc in corpus.documents() {
        let ms = doc.mentions();
        // Longest containment chain per mention: containers are processed
        // first (larger spans), so each depth is 1 + max container depth.
        let mut order: Vec<usize> = (0..ms.len()).collect();
        order.sort_by_key(|&i| core::cmp::Reverse(ms[i].span().len()));
        let mut depth = alloc::vec![1usize; ms.len()];
        for &i in &order {
            let mut best = 0usize;
            for &j in &order {
                if ms[j].span().strictly_contains(ms[i].span()) {
                    best = best.max(depth[j]);
                }
            }
            depth[i] = best + 1;
        }
        for (i, m) in ms.iter().enumerate() {
            let is_inner = strictly_contained(m, ms);
            stats.total += 1;
            let entry = stats.per_type.entry(m.entity_type().to_string()).or_default();
            entry.total += 1;
            if is_inner {
                stats.inner += 1;
                entry.inner += 1;
            } else {
                stats.outer += 1;
                entry.outer += 1;
            }
            *stats.depth_histogram.entry(depth[i]).or_insert(0) += 1;
        }
    }
    stats
}
