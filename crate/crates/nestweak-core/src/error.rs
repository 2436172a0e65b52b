//! Error type shared by all core operations.

use alloc::string::String;

/// Errors raised by corpus construction and the span algorithms.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error("{doc_id}: span [{start}..{end}) out of bounds for text of {len} chars")]
    SpanOutOfBounds {
        doc_id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("{doc_id}: empty entity type on span [{start}..{end})")]
    EmptyEntityType {
        doc_id: String,
        start: usize,
        end: usize,
    },
    #[error("{doc_id}: annotation text {expected:?} does not match document slice {found:?} at [{start}..{end})")]
    OffsetMismatch {
        doc_id: String,
        start: usize,
        end: usize,
        expected: String,
        found: String,
    },
    #[error("line {line}: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("line {line}: discontinuous span fragments are not supported")]
    DiscontinuousSpan { line: usize },
    #[error("{doc_id}: invalid {layer} layer: {detail}")]
    InvalidLayer {
        doc_id: String,
        layer: &'static str,
        detail: String,
    },
    #[error("duplicate document id {0:?}")]
    DuplicateDocId(String),
    #[error("{doc_id}: entity type {entity_type:?} not in the corpus type inventory")]
    UnknownEntityType { doc_id: String, entity_type: String },
    #[error("{doc_id}: crossing spans [{a_start}..{a_end}) {a_type} and [{b_start}..{b_end}) {b_type}")]
    CrossingSpans {
        doc_id: String,
        a_start: usize,
        a_end: usize,
        a_type: String,
        b_start: usize,
        b_end: usize,
        b_type: String,
    },
    #[error("{doc_id}: corpus is not flat: [{a_start}..{a_end}) {a_type} overlaps [{b_start}..{b_end}) {b_type}")]
    NotFlat {
        doc_id: String,
        a_start: usize,
        a_end: usize,
        a_type: String,
        b_start: usize,
        b_end: usize,
        b_type: String,
    },
    #[error("{doc_id}: no dependency root available for mention [{start}..{end})")]
    MissingDependencyLayer {
        doc_id: String,
        start: usize,
        end: usize,
    },
    #[error("{doc_id}: mention [{start}..{end}) covers no tokens")]
    TooShort {
        doc_id: String,
        start: usize,
        end: usize,
    },
    #[error("cannot split {docs} documents into {folds} folds")]
    TooFewDocuments { docs: usize, folds: usize },
    #[error("unknown document {0:?}")]
    UnknownDoc(String),
    #[error("document sets differ: {0}")]
    DocMismatch(String),
    #[error("training corpus has no usable sentences")]
    EmptyTrain,
    #[error("prompt template asset is missing or empty")]
    MissingAsset,
    #[error("shot count {0} is not one of 0, 1, 5")]
    InvalidShots(u8),
}
