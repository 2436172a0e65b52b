//! Candidate-span enumeration and the positive/negative/neutral partition.
//!
//! Every token-aligned span of a document is assigned exactly one label:
//! spans equal to a flat mention are positive; spans strictly inside a flat
//! mention are neutral (in geometric mode unconditionally, in content-aware
//! mode only when they match a known surface or canonical form); everything
//! else is negative. The exported mask gives loss weight 1 to positives and
//! negatives and 0 to neutrals, so a downstream trainer can apply it without
//! knowing anything about the matching.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::inclusions::SurfaceIndex;
use crate::lemma::{canonical_form, LemmaDictionary};
use crate::nesting::{flatness_violation, not_flat_error};
use crate::types::{Corpus, Document, Mention, Span};

/// A token-aligned candidate span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Candidate {
    pub start: usize,
    pub end: usize,
    pub token_len: usize,
}

/// Enumerate all token-aligned spans of 1..=max_len_tokens tokens within
/// each sentence (whole document when no sentence layer is attached),
/// deduplicated and sorted.
pub fn enumerate_spans(doc: &Document, max_len_tokens: usize) -> Vec<Candidate> {
    let tokens = doc.effective_tokens();
    let mut out = Vec::new();
    for sent in doc.sentences_or_whole() {
        let inside: Vec<Span> = tokens
            .iter()
            .copied()
            .filter(|t| sent.contains(*t))
            .collect();
        let n = inside.len();
        for len in 1..=max_len_tokens.min(n) {
            for i in 0..=n - len {
                out.push(Candidate {
                    start: inside[i].start,
                    end: inside[i + len - 1].end,
                    token_len: len,
                });
            }
        }
    }
    out.sort_unstable();
    out.dedup();
    out
}

/// Partition flavor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionMode {
    /// Every span strictly inside a flat mention is neutral.
    Geometric,
    /// Only within-mention spans matching the surface index are neutral.
    ContentAware,
}

/// Which index the content-aware match consults.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    ExactSurface,
    CanonicalForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum LabelKind {
    Positive,
    Negative,
    Neutral,
}

impl LabelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            LabelKind::Positive => "Positive",
            LabelKind::Negative => "Negative",
            LabelKind::Neutral => "Neutral",
        }
    }

    /// Loss weight of the exported mask: neutrals are excluded from loss.
    pub fn loss_weight(&self) -> u8 {
        match self {
            LabelKind::Neutral => 0,
            _ => 1,
        }
    }
}

/// One labeled candidate span.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpanLabel {
    pub doc_id: String,
    pub start: usize,
    pub end: usize,
    pub token_len: usize,
    pub label: LabelKind,
    /// Entity type when positive.
    pub pos_type: Option<String>,
    /// Matched surface or canonical key when neutral (content-aware mode).
    pub neutral_reason: Option<String>,
}

/// Labels for one document plus the gold mentions that no candidate covers
/// (longer than the cap, or not aligned to token boundaries). Those are
/// reported, never silently dropped.
#[derive(Debug, Clone)]
pub struct Partitioned {
    pub labels: Vec<SpanLabel>,
    pub unrepresented: Vec<Mention>,
}

/// Label every candidate span of a flat document.
pub fn partition_spans(
    doc: &Document,
    candidates: &[Candidate],
    index: &SurfaceIndex,
    mode: PartitionMode,
    match_kind: MatchKind,
    dict: &LemmaDictionary,
) -> Result<Partitioned, CoreError> {
    if let Some((a, b)) = flatness_violation(doc) {
        return Err(not_flat_error(doc, a, b));
    }
    let map = doc.char_map();
    let mentions = doc.mentions();
    let mut labels = Vec::with_capacity(candidates.len() + mentions.len() / 4);

    for c in candidates {
        let span = Span::new(c.start, c.end);
        let positives: Vec<&Mention> = mentions.iter().filter(|m| m.span() == span).collect();
        if !positives.is_empty() {
            // Equal spans with two types are the one sanctioned duplication.
            for m in positives {
                labels.push(SpanLabel {
                    doc_id: doc.doc_id().to_string(),
                    start: c.start,
                    end: c.end,
                    token_len: c.token_len,
                    label: LabelKind::Positive,
                    pos_type: Some(m.entity_type().to_string()),
                    neutral_reason: None,
                });
            }
            continue;
        }
        let within = mentions.iter().any(|m| m.span().strictly_contains(span));
        let neutral_reason = if within {
            match mode {
                PartitionMode::Geometric => Some(None),
                PartitionMode::ContentAware => {
                    let surface = map.slice(span).unwrap_or_default();
                    match match_kind {
                        MatchKind::ExactSurface => index
                            .contains_exact(surface)
                            .then(|| Some(surface.to_string())),
                        MatchKind::CanonicalForm => {
                            let canon = canonical_form(surface, dict);
                            index.contains_canonical(&canon).then_some(Some(canon))
                        }
                    }
                }
            }
        } else {
            None
        };
        match neutral_reason {
            Some(reason) => labels.push(SpanLabel {
                doc_id: doc.doc_id().to_string(),
                start: c.start,
                end: c.end,
                token_len: c.token_len,
                label: LabelKind::Neutral,
                pos_type: None,
                neutral_reason: reason,
            }),
            None => labels.push(SpanLabel {
                doc_id: doc.doc_id().to_string(),
                start: c.start,
                end: c.end,
                token_len: c.token_len,
                label: LabelKind::Negative,
                pos_type: None,
                neutral_reason: None,
            }),
        }
    }

    let unrepresented = mentions
        .iter()
        .filter(|m| !candidates.iter().any(|c| Span::new(c.start, c.end) == m.span()))
        .cloned()
        .collect();
    Ok(Partitioned {
        labels,
        unrepresented,
    })
}

/// Convenience: enumerate and partition every document of a flat corpus.
pub fn partition_corpus(
    corpus: &Corpus,
    index: &SurfaceIndex,
    mode: PartitionMode,
    match_kind: MatchKind,
    dict: &LemmaDictionary,
    max_len_tokens: usize,
) -> Result<(Vec<SpanLabel>, Vec<(String, Mention)>), CoreError> {
    let mut labels = Vec::new();
    let mut skipped = Vec::new();
    for doc in corpus.documents() {
        let candidates = enumerate_spans(doc, max_len_tokens);
        let part = partition_spans(doc, &candidates, index, mode, match_kind, dict)?;
        labels.extend(part.labels);
        skipped.extend(
            part.unrepresented
                .into_iter()
                .map(|m| (doc.doc_id().to_string(), m)),
        );
    }
    labels.sort();
    Ok((labels, skipped))
}

/// Outcome of merging inclusion positives into a label set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipReport {
    /// Neutral spans flipped to positive.
    pub flipped: usize,
    /// Inclusion span was already positive with a different type; a second
    /// positive record was added and the conflict counted here.
    pub conflicts: usize,
    /// Inclusion span was not neutral (negative or not enumerated); left
    /// untouched.
    pub unmatched: usize,
}

/// Flip neutral spans that coincide with mined inclusions to positive,
/// carrying the inclusion's type.
pub fn with_inclusion_positives(
    mut labels: Vec<SpanLabel>,
    inclusions: &BTreeMap<String, Vec<(usize, usize, String)>>,
) -> (Vec<SpanLabel>, FlipReport) {
    let mut report = FlipReport::default();
    let mut extra: Vec<SpanLabel> = Vec::new();
    for (doc_id, spans) in inclusions {
        for (start, end, entity_type) in spans {
            let at_span: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, l)| l.doc_id == *doc_id && l.start == *start && l.end == *end)
                .map(|(i, _)| i)
                .collect();
            let already_positive = at_span.iter().any(|&i| {
                labels[i].label == LabelKind::Positive
                    && labels[i].pos_type.as_deref() == Some(entity_type.as_str())
            });
            if already_positive {
                continue;
            }
            if let Some(&i) = at_span
                .iter()
                .find(|&&i| labels[i].label == LabelKind::Neutral)
            {
                labels[i].label = LabelKind::Positive;
                labels[i].pos_type = Some(entity_type.clone());
                labels[i].neutral_reason = None;
                report.flipped += 1;
            } else if let Some(&i) = at_span
                .iter()
                .find(|&&i| labels[i].label == LabelKind::Positive)
            {
                // Already positive with a different type: keep both records.
                extra.push(SpanLabel {
                    doc_id: doc_id.clone(),
                    start: *start,
                    end: *end,
                    token_len: labels[i].token_len,
                    label: LabelKind::Positive,
                    pos_type: Some(entity_type.clone()),
                    neutral_reason: None,
                });
                report.conflicts += 1;
            } else {
                report.unmatched += 1;
            }
        }
    }
    labels.extend(extra);
    labels.sort();
    labels.dedup();
    (labels, report)
}

/// Render labels in the export format: one record per span,
/// `doc_id<TAB>start<TAB>end<TAB>label<TAB>type_or_-<TAB>reason_or_-`,
/// sorted by `(doc_id, start, end)`.
pub fn render_span_labels(labels: &[SpanLabel]) -> String {
    let mut sorted: Vec<&SpanLabel> = labels.iter().collect();
    sorted.sort();
    let mut out = String::new();
    for l in sorted {
        out.push_str(&alloc::format!(
            "{}\t{}\t{}\t{}\t{}\t{}\n",
            l.doc_id,
            l.start,
            l.end,
            l.label.as_str(),
            l.pos_type.as_deref().unwrap_or("-"),
            l.neutral_reason.as_deref().unwrap_or("-"),
        ));
    }
    out
}
