//! Inclusion mining: pseudo-nested mentions recovered by matching sub-spans
//! of flat mentions against the surface forms (or canonical forms) of other
//! mentions in the corpus, plus scoring against gold nested annotations.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::lemma::{canonical_of_lemmas, token_lemmas, LemmaDictionary};
use crate::nesting::{flatness_violation, flatten, not_flat_error};
use crate::types::{CharMap, Corpus, Document, Span};

/// Matching flavor for inclusion extraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchMode {
    /// Raw surface strings, constrained to token boundaries.
    Exact,
    /// Canonical forms (sorted case-folded lemmas) of token windows.
    Lemmatized,
}

/// Surface-form index over a corpus: raw surfaces and canonical forms, each
/// mapped to the entity types they occur with and their frequencies.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SurfaceIndex {
    /// surface -> type -> count
    exact: BTreeMap<String, BTreeMap<String, u32>>,
    /// canonical form -> type -> surface -> count
    canonical: BTreeMap<String, BTreeMap<String, BTreeMap<String, u32>>>,
}

/// Pick the most frequent entry; ties break to the lexicographically
/// smallest key, which is the iteration order of a `BTreeMap`.
fn most_frequent(counts: impl IntoIterator<Item = (impl AsRef<str>, u32)>) -> Option<(String, u32)> {
    let mut best: Option<(String, u32)> = None;
    for (key, count) in counts {
        match &best {
            Some((_, c)) if *c >= count => {}
            _ => best = Some((key.as_ref().to_string(), count)),
        }
    }
    best
}

impl SurfaceIndex {
    pub fn exact_types(&self, surface: &str) -> Option<&BTreeMap<String, u32>> {
        self.exact.get(surface)
    }

    pub fn contains_exact(&self, surface: &str) -> bool {
        self.exact.contains_key(surface)
    }

    pub fn contains_canonical(&self, canon: &str) -> bool {
        self.canonical.contains_key(canon)
    }

    /// Most frequent type for a raw surface (ties: lexicographic type name).
    pub fn resolve_exact(&self, surface: &str) -> Option<(String, u32)> {
        most_frequent(self.exact.get(surface)?.iter().map(|(t, c)| (t, *c)))
    }

    /// Most frequent type for a canonical form, counting all surfaces.
    pub fn resolve_canonical(&self, canon: &str) -> Option<(String, u32)> {
        let types = self.canonical.get(canon)?;
        most_frequent(
            types
                .iter()
                .map(|(t, surfaces)| (t, surfaces.values().sum::<u32>())),
        )
    }

    /// Most frequent raw surface for a `(canonical, type)` group.
    pub fn representative_surface(&self, canon: &str, entity_type: &str) -> Option<String> {
        let surfaces = self.canonical.get(canon)?.get(entity_type)?;
        most_frequent(surfaces.iter().map(|(s, c)| (s, *c))).map(|(s, _)| s)
    }

    pub fn exact_surface_count(&self) -> usize {
        self.exact.len()
    }

    pub fn canonical_key_count(&self) -> usize {
        self.canonical.len()
    }

    /// Types that occur in the exact index, with total mention counts.
    pub fn type_totals(&self) -> BTreeMap<String, u32> {
        let mut totals: BTreeMap<String, u32> = BTreeMap::new();
        for types in self.exact.values() {
            for (t, c) in types {
                *totals.entry(t.clone()).or_insert(0) += c;
            }
        }
        totals
    }
}

/// Index every mention surface (and its canonical form) with its type.
pub fn build_surface_index(corpus: &Corpus, dict: &LemmaDictionary) -> SurfaceIndex {
    let mut index = SurfaceIndex::default();
    for doc in corpus.documents() {
        for m in doc.mentions() {
            *index
                .exact
                .entry(m.surface().to_string())
                .or_default()
                .entry(m.entity_type().to_string())
                .or_insert(0) += 1;
            let canon = canonical_of_lemmas(&token_lemmas(m.surface(), dict));
            if canon.is_empty() {
                continue;
            }
            *index
                .canonical
                .entry(canon)
                .or_default()
                .entry(m.entity_type().to_string())
                .or_default()
                .entry(m.surface().to_string())
                .or_insert(0) += 1;
        }
    }
    index
}

/// Result of inclusion extraction: the augmented corpus plus counts of the
/// mentions that were actually added.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub corpus: Corpus,
    pub added_total: usize,
    pub added_per_type: BTreeMap<String, usize>,
}

/// Mine pseudo-nested mentions inside every flat mention of the corpus.
///
/// Candidate sub-spans are contiguous token windows of the outer mention of
/// 1..len-1 tokens (a match must begin and end at word boundaries; the full
/// window is excluded, which realizes the strict-substring condition). The
/// type of an added mention comes from the index: most frequent type first,
/// ties broken by type name. Duplicates collapse; existing mentions are
/// never modified or removed.
pub fn extract_inclusions(
    corpus: &Corpus,
    index: &SurfaceIndex,
    mode: MatchMode,
    dict: &LemmaDictionary,
) -> Result<Extraction, CoreError> {
    let mut docs = Vec::with_capacity(corpus.documents().len());
    let mut added_total = 0usize;
    let mut added_per_type: BTreeMap<String, usize> = BTreeMap::new();

    for doc in corpus.documents() {
        if let Some((a, b)) = flatness_violation(doc) {
            return Err(not_flat_error(doc, a, b));
        }
        let existing: BTreeSet<(usize, usize, String)> =
            doc.mentions().iter().map(|m| m.to_triple()).collect();
        let mut found: BTreeSet<(usize, usize, String)> = BTreeSet::new();

        for m in doc.mentions() {
            let surface = m.surface();
            let smap = CharMap::new(surface);
            let tokens = crate::types::tokenize(surface);
            if tokens.len() < 2 {
                continue;
            }
            let lemmas = match mode {
                MatchMode::Lemmatized => token_lemmas(surface, dict),
                MatchMode::Exact => Vec::new(),
            };
            for win_len in 1..tokens.len() {
                for i in 0..=tokens.len() - win_len {
                    let rel = Span::new(tokens[i].start, tokens[i + win_len - 1].end);
                    let abs = Span::new(m.start() + rel.start, m.start() + rel.end);
                    if abs == m.span() {
                        continue;
                    }
                    let resolved = match mode {
                        MatchMode::Exact => {
                            let window = smap.slice(rel).unwrap_or_default();
                            index.resolve_exact(window)
                        }
                        MatchMode::Lemmatized => {
                            let canon = canonical_of_lemmas(&lemmas[i..i + win_len]);
                            index.resolve_canonical(&canon)
                        }
                    };
                    if let Some((entity_type, _)) = resolved {
                        found.insert((abs.start, abs.end, entity_type));
                    }
                }
            }
        }

        for key in &found {
            if !existing.contains(key) {
                added_total += 1;
                *added_per_type.entry(key.2.clone()).or_insert(0) += 1;
            }
        }
        let triples: Vec<(usize, usize, String)> =
            existing.into_iter().chain(found).collect();
        docs.push(Document::new(doc.doc_id(), doc.text(), triples)?);
    }

    let mut inventory = corpus.type_inventory().to_vec();
    for t in added_per_type.keys() {
        if !inventory.iter().any(|x| x == t) {
            inventory.push(t.clone());
        }
    }
    Ok(Extraction {
        corpus: Corpus::new(corpus.split_name(), docs, inventory)?,
        added_total,
        added_per_type,
    })
}

/// Per-type row of the inclusion score table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TypeScoreRow {
    pub true_inner: usize,
    pub candidates: usize,
    pub span_and_type_matches: usize,
    pub precision: f64,
}

/// Inclusion quality against gold nested annotations.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct InclusionScore {
    pub candidates: usize,
    pub span_matches: usize,
    pub span_and_type_matches: usize,
    pub gold_inner: usize,
    pub precision: f64,
    pub recall: f64,
    pub type_accuracy: f64,
    pub per_type: BTreeMap<String, TypeScoreRow>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Score a pseudo-nested corpus against the gold nested corpus.
///
/// Candidates are the mentions of `pseudo` that are not part of the flat
/// (outermost-only) projection of `gold`; since extraction never touches
/// existing mentions, this recovers exactly the added inclusions. A span
/// match means some gold *inner* mention has the same span; a full match
/// also agrees on the type.
pub fn score_inclusions(pseudo: &Corpus, gold: &Corpus) -> Result<InclusionScore, CoreError> {
    let pseudo_ids: Vec<&str> = pseudo.documents().iter().map(|d| d.doc_id()).collect();
    let gold_ids: Vec<&str> = gold.documents().iter().map(|d| d.doc_id()).collect();
    if pseudo_ids != gold_ids {
        return Err(CoreError::DocMismatch(alloc::format!(
            "{} pseudo vs {} gold documents",
            pseudo_ids.len(),
            gold_ids.len()
        )));
    }

    let flat_gold = flatten(gold)?;
    let mut score = InclusionScore::default();

    for ((pdoc, gdoc), fdoc) in pseudo
        .documents()
        .iter()
        .zip(gold.documents())
        .zip(flat_gold.documents())
    {
        let flat_keys: BTreeSet<(usize, usize, String)> =
            fdoc.mentions().iter().map(|m| m.to_triple()).collect();
        let inner: Vec<&crate::types::Mention> = gdoc
            .mentions()
            .iter()
            .filter(|m| {
                gdoc.mentions()
                    .iter()
                    .any(|o| o.span().strictly_contains(m.span()))
            })
            .collect();
        let inner_keys: BTreeSet<(usize, usize, String)> =
            inner.iter().map(|m| m.to_triple()).collect();
        let inner_spans: BTreeSet<(usize, usize)> =
            inner.iter().map(|m| (m.start(), m.end())).collect();

        for m in inner {
            score
                .per_type
                .entry(m.entity_type().to_string())
                .or_default()
                .true_inner += 1;
        }
        score.gold_inner += inner_keys.len();

        for m in pdoc.mentions() {
            let key = m.to_triple();
            if flat_keys.contains(&key) {
                continue;
            }
            score.candidates += 1;
            let row = score
                .per_type
                .entry(m.entity_type().to_string())
                .or_default();
            row.candidates += 1;
            if inner_spans.contains(&(m.start(), m.end())) {
                score.span_matches += 1;
            }
            if inner_keys.contains(&key) {
                score.span_and_type_matches += 1;
                row.span_and_type_matches += 1;
            }
        }
    }

    score.precision = ratio(score.span_and_type_matches, score.candidates);
    score.recall = ratio(score.span_and_type_matches, score.gold_inner);
    score.type_accuracy = ratio(score.span_and_type_matches, score.span_matches);
    for row in score.per_type.values_mut() {
        row.precision = ratio(row.span_and_type_matches, row.candidates);
    }
    Ok(score)
}
