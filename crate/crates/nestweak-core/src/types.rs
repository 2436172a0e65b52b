//! Core data model: documents, typed mentions, and corpora.
//!
//! All offsets throughout the crate are **character** offsets (not bytes),
//! half-open `[start, end)`. Documents are immutable once constructed, so
//! every operation downstream is pure per document and safe to run in
//! parallel across documents.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;

/// Half-open character interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Span {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// `other` lies inside `self` (boundaries may coincide).
    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    /// `other` lies inside `self` and the spans are not identical.
    pub fn strictly_contains(&self, other: Span) -> bool {
        self.contains(other) && *self != other
    }

    /// The half-open intervals intersect.
    pub fn overlaps(&self, other: Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

/// Character-offset to byte-offset table for one text.
///
/// Built once per document and reused; `slice` is O(1) after construction.
pub struct CharMap<'a> {
    text: &'a str,
    byte_at: Vec<usize>,
}

impl<'a> CharMap<'a> {
    pub fn new(text: &'a str) -> CharMap<'a> {
        let mut byte_at: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        byte_at.push(text.len());
        CharMap { text, byte_at }
    }

    pub fn char_len(&self) -> usize {
        self.byte_at.len() - 1
    }

    /// Slice by character offsets; `None` when out of bounds or inverted.
    pub fn slice(&self, span: Span) -> Option<&'a str> {
        if span.start > span.end || span.end > self.char_len() {
            return None;
        }
        Some(&self.text[self.byte_at[span.start]..self.byte_at[span.end]])
    }

    /// Character offset of an exact byte boundary, if it is one.
    pub fn char_of_byte(&self, byte: usize) -> Option<usize> {
        self.byte_at.binary_search(&byte).ok()
    }
}

/// Default tokenizer: maximal runs of alphanumeric characters; everything
/// else is a separator. Used whenever a document carries no token layer.
pub fn tokenize(text: &str) -> Vec<Span> {
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let mut len = 0usize;
    for (ci, ch) in text.chars().enumerate() {
        len = ci + 1;
        if ch.is_alphanumeric() {
            if start.is_none() {
                start = Some(ci);
            }
        } else if let Some(s) = start.take() {
            out.push(Span::new(s, ci));
        }
    }
    if let Some(s) = start {
        out.push(Span::new(s, len));
    }
    out
}

/// Like [`tokenize`] but yields the token strings directly.
pub fn tokenize_str(text: &str) -> Vec<&str> {
    let map = CharMap::new(text);
    tokenize(text)
        .into_iter()
        .filter_map(|sp| map.slice(sp))
        .collect()
}

/// Newline/period sentence heuristic, used only when a document carries no
/// sentence layer. Boundaries fall after `.`, `!`, `?` and at newlines;
/// whitespace-only segments are dropped and spans are trimmed.
pub fn split_sentences(text: &str) -> Vec<Span> {
    let chars: Vec<char> = text.chars().collect();
    let mut raw = Vec::new();
    let mut start = 0usize;
    for (i, ch) in chars.iter().enumerate() {
        match ch {
            '\n' => {
                raw.push(Span::new(start, i));
                start = i + 1;
            }
            '.' | '!' | '?' => {
                raw.push(Span::new(start, i + 1));
                start = i + 1;
            }
            _ => {}
        }
    }
    raw.push(Span::new(start, chars.len()));

    let mut out = Vec::new();
    for sp in raw {
        let mut s = sp.start;
        let mut e = sp.end;
        while s < e && chars[s].is_whitespace() {
            s += 1;
        }
        while e > s && chars[e - 1].is_whitespace() {
            e -= 1;
        }
        if s < e {
            out.push(Span::new(s, e));
        }
    }
    out
}

/// A typed entity mention: a character span plus its entity type, with the
/// covered text cached at construction.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mention {
    start: usize,
    end: usize,
    entity_type: String,
    surface: String,
}

impl Mention {
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn end(&self) -> usize {
        self.end
    }

    pub fn entity_type(&self) -> &str {
        &self.entity_type
    }

    /// The document text covered by this mention.
    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn span(&self) -> Span {
        Span::new(self.start, self.end)
    }

    /// `(start, end, type)` identity used for set comparisons.
    pub fn key(&self) -> (usize, usize, &str) {
        (self.start, self.end, &self.entity_type)
    }

    pub fn to_triple(&self) -> (usize, usize, String) {
        (self.start, self.end, self.entity_type.clone())
    }
}

/// One annotated document. Mentions are kept sorted by `(start, end, type)`
/// and exact duplicates (same span, same type) are collapsed on construction;
/// same-span mentions with different types are retained.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    doc_id: String,
    text: String,
    char_len: usize,
    mentions: Vec<Mention>,
    tokens: Option<Vec<Span>>,
    sentences: Option<Vec<Span>>,
    dep_roots: Option<BTreeMap<(usize, usize), usize>>,
}

impl Document {
    /// Build a document from raw `(start, end, type)` triples, slicing and
    /// caching each surface. Fails on out-of-bounds or empty-type mentions.
    pub fn new(
        doc_id: impl Into<String>,
        text: impl Into<String>,
        mentions: impl IntoIterator<Item = (usize, usize, String)>,
    ) -> Result<Document, CoreError> {
        let doc_id = doc_id.into();
        let text = text.into();
        let map = CharMap::new(&text);
        let char_len = map.char_len();

        let mut built = Vec::new();
        for (start, end, entity_type) in mentions {
            if entity_type.is_empty() {
                return Err(CoreError::EmptyEntityType {
                    doc_id,
                    start,
                    end,
                });
            }
            let surface = match map.slice(Span::new(start, end)) {
                Some(s) if start < end => s.to_string(),
                _ => {
                    return Err(CoreError::SpanOutOfBounds {
                        doc_id,
                        start,
                        end,
                        len: char_len,
                    })
                }
            };
            built.push(Mention {
                start,
                end,
                entity_type,
                surface,
            });
        }
        built.sort_unstable();
        built.dedup();

        Ok(Document {
            doc_id,
            text,
            char_len,
            mentions: built,
            tokens: None,
            sentences: None,
            dep_roots: None,
        })
    }

    pub fn doc_id(&self) -> &str {
        &self.doc_id
    }

    pub fn with_doc_id(mut self, doc_id: impl Into<String>) -> Document {
        self.doc_id = doc_id.into();
        self
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn char_len(&self) -> usize {
        self.char_len
    }

    pub fn mentions(&self) -> &[Mention] {
        &self.mentions
    }

    pub fn tokens(&self) -> Option<&[Span]> {
        self.tokens.as_deref()
    }

    pub fn sentences(&self) -> Option<&[Span]> {
        self.sentences.as_deref()
    }

    pub fn dep_roots(&self) -> Option<&BTreeMap<(usize, usize), usize>> {
        self.dep_roots.as_ref()
    }

    /// Attach an external token layer. Spans must be sorted, non-overlapping
    /// and inside the text.
    pub fn with_tokens(mut self, tokens: Vec<Span>) -> Result<Document, CoreError> {
        let mut prev_end = 0usize;
        for sp in &tokens {
            if sp.is_empty() || sp.end > self.char_len || sp.start < prev_end {
                return Err(CoreError::InvalidLayer {
                    doc_id: self.doc_id,
                    layer: "token",
                    detail: alloc::format!("bad span [{}..{})", sp.start, sp.end),
                });
            }
            prev_end = sp.end;
        }
        self.tokens = Some(tokens);
        Ok(self)
    }

    /// Attach an external sentence layer (sorted, non-overlapping, in bounds).
    pub fn with_sentences(mut self, sentences: Vec<Span>) -> Result<Document, CoreError> {
        let mut prev_end = 0usize;
        for sp in &sentences {
            if sp.is_empty() || sp.end > self.char_len || sp.start < prev_end {
                return Err(CoreError::InvalidLayer {
                    doc_id: self.doc_id,
                    layer: "sentence",
                    detail: alloc::format!("bad span [{}..{})", sp.start, sp.end),
                });
            }
            prev_end = sp.end;
        }
        self.sentences = Some(sentences);
        Ok(self)
    }

    /// Attach syntactic roots: mention span -> index into the effective token
    /// layer. Every root token must lie inside its mention.
    pub fn with_dep_roots(
        mut self,
        roots: BTreeMap<(usize, usize), usize>,
    ) -> Result<Document, CoreError> {
        let tokens = self.effective_tokens();
        for (&(start, end), &tok) in &roots {
            let mention_span = Span::new(start, end);
            let ok = self.mentions.iter().any(|m| m.span() == mention_span)
                && tokens
                    .get(tok)
                    .is_some_and(|t| mention_span.contains(*t));
            if !ok {
                return Err(CoreError::InvalidLayer {
                    doc_id: self.doc_id,
                    layer: "dependency",
                    detail: alloc::format!(
                        "root token {tok} does not lie inside mention [{start}..{end})"
                    ),
                });
            }
        }
        self.dep_roots = Some(roots);
        Ok(self)
    }

    pub fn char_map(&self) -> CharMap<'_> {
        CharMap::new(&self.text)
    }

    /// The attached token layer, or the default tokenization of the text.
    pub fn effective_tokens(&self) -> Vec<Span> {
        match &self.tokens {
            Some(t) => t.clone(),
            None => tokenize(&self.text),
        }
    }

    /// Sentence layer if attached, otherwise the whole document as one span.
    pub fn sentences_or_whole(&self) -> Vec<Span> {
        match &self.sentences {
            Some(s) => s.clone(),
            None => alloc::vec![Span::new(0, self.char_len)],
        }
    }

    /// Sentence layer if attached, otherwise the newline/period heuristic.
    pub fn sentences_or_heuristic(&self) -> Vec<Span> {
        match &self.sentences {
            Some(s) => s.clone(),
            None => split_sentences(&self.text),
        }
    }

    /// Indices (into `tokens`) of the tokens lying fully inside the mention.
    pub fn mention_token_indices(&self, mention: &Mention, tokens: &[Span]) -> Vec<usize> {
        tokens
            .iter()
            .enumerate()
            .filter(|(_, t)| mention.span().contains(**t))
            .map(|(i, _)| i)
            .collect()
    }
}

/// A named split of documents plus the entity-type inventory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Corpus {
    split_name: String,
    documents: Vec<Document>,
    type_inventory: Vec<String>,
}

impl Corpus {
    /// Build a corpus with an explicit type inventory. Documents are sorted
    /// by id; ids must be unique and every mention type must be listed.
    pub fn new(
        split_name: impl Into<String>,
        mut documents: Vec<Document>,
        type_inventory: Vec<String>,
    ) -> Result<Corpus, CoreError> {
        documents.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
        for pair in documents.windows(2) {
            if pair[0].doc_id == pair[1].doc_id {
                return Err(CoreError::DuplicateDocId(pair[0].doc_id.clone()));
            }
        }
        for doc in &documents {
            for m in doc.mentions() {
                if !type_inventory.iter().any(|t| t == m.entity_type()) {
                    return Err(CoreError::UnknownEntityType {
                        doc_id: doc.doc_id.clone(),
                        entity_type: m.entity_type().to_string(),
                    });
                }
            }
        }
        Ok(Corpus {
            split_name: split_name.into(),
            documents,
            type_inventory,
        })
    }

    /// Build a corpus inferring the inventory from the mentions (sorted).
    pub fn from_documents(
        split_name: impl Into<String>,
        documents: Vec<Document>,
    ) -> Result<Corpus, CoreError> {
        let mut types: Vec<String> = documents
            .iter()
            .flat_map(|d| d.mentions().iter().map(|m| m.entity_type().to_string()))
            .collect();
        types.sort_unstable();
        types.dedup();
        Corpus::new(split_name, documents, types)
    }

    pub fn split_name(&self) -> &str {
        &self.split_name
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn type_inventory(&self) -> &[String] {
        &self.type_inventory
    }

    pub fn document(&self, doc_id: &str) -> Option<&Document> {
        self.documents
            .binary_search_by(|d| d.doc_id.as_str().cmp(doc_id))
            .ok()
            .map(|i| &self.documents[i])
    }

    pub fn mention_count(&self) -> usize {
        self.documents.iter().map(|d| d.mentions().len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charmap_slices_by_char_offsets() {
        let map = CharMap::new("Россия won");
        assert_eq!(map.char_len(), 10);
        assert_eq!(map.slice(Span::new(0, 6)), Some("Россия"));
        assert_eq!(map.slice(Span::new(7, 10)), Some("won"));
        assert_eq!(map.slice(Span::new(0, 11)), None);
    }

    #[test]
    fn tokenizer_splits_on_non_alphanumeric() {
        let spans = tokenize("Min. of Foreign Affairs of Russia");
        let strs = tokenize_str("Min. of Foreign Affairs of Russia");
        assert_eq!(strs, ["Min", "of", "Foreign", "Affairs", "of", "Russia"]);
        assert_eq!(spans[0], Span::new(0, 3));
        assert_eq!(spans[5], Span::new(27, 33));
    }

    #[test]
    fn tokenizer_handles_cyrillic_and_digits() {
        assert_eq!(tokenize_str("МИД России, 2024 г."), ["МИД", "России", "2024", "г"]);
    }

    #[test]
    fn sentence_heuristic_period_and_newline() {
        let sents = split_sentences("One two. Three\nfour");
        assert_eq!(sents.len(), 3);
        let chars: Vec<char> = "One two. Three\nfour".chars().collect();
        let text_of = |sp: Span| chars[sp.start..sp.end].iter().collect::<String>();
        assert_eq!(text_of(sents[0]), "One two.");
        assert_eq!(text_of(sents[1]), "Three");
        assert_eq!(text_of(sents[2]), "four");
    }

    #[test]
    fn document_dedups_exact_duplicates_and_keeps_type_variants() {
        let doc = Document::new(
            "d",
            "Russia",
            vec![
                (0, 6, "COUNTRY".to_string()),
                (0, 6, "COUNTRY".to_string()),
                (0, 6, "LOCATION".to_string()),
            ],
        )
        .unwrap();
        assert_eq!(doc.mentions().len(), 2);
        assert_eq!(doc.mentions()[0].entity_type(), "COUNTRY");
        assert_eq!(doc.mentions()[1].entity_type(), "LOCATION");
        assert_eq!(doc.mentions()[0].surface(), "Russia");
    }

    #[test]
    fn document_rejects_out_of_bounds_and_empty_type() {
        assert!(matches!(
            Document::new("d", "abc", vec![(0, 4, "X".to_string())]),
            Err(CoreError::SpanOutOfBounds { .. })
        ));
        assert!(matches!(
            Document::new("d", "abc", vec![(2, 2, "X".to_string())]),
            Err(CoreError::SpanOutOfBounds { .. })
        ));
        assert!(matches!(
            Document::new("d", "abc", vec![(0, 1, String::new())]),
            Err(CoreError::EmptyEntityType { .. })
        ));
    }

    #[test]
    fn token_layer_validation() {
        let doc = Document::new("d", "a b c", Vec::new()).unwrap();
        assert!(doc
            .clone()
            .with_tokens(vec![Span::new(0, 1), Span::new(2, 3)])
            .is_ok());
        assert!(doc
            .clone()
            .with_tokens(vec![Span::new(0, 2), Span::new(1, 3)])
            .is_err());
        assert!(doc.with_tokens(vec![Span::new(0, 9)]).is_err());
    }

    #[test]
    fn corpus_rejects_duplicate_ids_and_unknown_types() {
        let d1 = Document::new("a", "x", Vec::new()).unwrap();
        let d2 = Document::new("a", "y", Vec::new()).unwrap();
        assert!(matches!(
            Corpus::from_documents("s", vec![d1.clone(), d2]),
            Err(CoreError::DuplicateDocId(_))
        ));
        let d3 = Document::new("b", "Russia", vec![(0, 6, "COUNTRY".to_string())]).unwrap();
        assert!(matches!(
            Corpus::new("s", vec![d3], vec!["OTHER".to_string()]),
            Err(CoreError::UnknownEntityType { .. })
        ));
    }

    #[test]
    fn corpus_documents_sorted_by_id() {
        let d1 = Document::new("b", "x", Vec::new()).unwrap();
        let d2 = Document::new("a", "y", Vec::new()).unwrap();
        let c = Corpus::from_documents("s", vec![d1, d2]).unwrap();
        assert_eq!(c.documents()[0].doc_id(), "a");
        assert!(c.document("b").is_some());
        assert!(c.document("z").is_none());
    }
}
