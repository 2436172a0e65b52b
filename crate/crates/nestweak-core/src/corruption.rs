//! Entity corruption: replace one word of every long flat mention with a
//! noise token, track the edits with a bidirectional offset map, emit k-fold
//! train/predict datasets, remap external predictions back onto the original
//! text, and assemble pseudo-nested training corpora.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::nesting::{flatness_violation, not_flat_error};
use crate::types::{Corpus, Document, Mention, Span};

/// Noise-token alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolKind {
    /// Random digit sequences, e.g. "798".
    Digits,
    /// Random consonant sequences that violate phonotactics, e.g. "klr".
    Letters,
    /// Mixed digits and consonants, e.g. "9z2".
    Diglets,
    /// ";;;"
    Semicolons,
    /// ",,,"
    Commas,
}

/// Which word of a long mention gets replaced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Position {
    Start,
    End,
    Middle,
    Random,
    /// Syntactic root from an attached dependency layer.
    Syntax,
}

/// When the damage happens relative to the fold split.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Train side corrupted, predict side clean.
    Early,
    /// Train side clean, predict side corrupted.
    Late,
}

#[derive(Debug, Clone)]
pub struct CorruptionConfig {
    pub symbol: SymbolKind,
    pub position: Position,
    pub strategy: Strategy,
    pub folds: usize,
    /// Mentions with at least this many tokens are corrupted (3 means
    /// "longer than 2 words").
    pub min_words: usize,
    /// Length of the replacement noise token in characters.
    pub replacement_len: usize,
    pub seed: u64,
}

impl CorruptionConfig {
    pub fn new(symbol: SymbolKind, position: Position, strategy: Strategy, seed: u64) -> Self {
        CorruptionConfig {
            symbol,
            position,
            strategy,
            folds: 5,
            min_words: 3,
            replacement_len: 3,
            seed,
        }
    }
}

/// Dominant script of a text, used to pick the consonant alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Script {
    Latin,
    Cyrillic,
}

const LATIN_CONSONANTS: &[char] = &[
    'b', 'c', 'd', 'f', 'g', 'h', 'j', 'k', 'l', 'm', 'n', 'p', 'q', 'r', 's', 't', 'v', 'w',
    'x', 'z',
];
const CYRILLIC_CONSONANTS: &[char] = &[
    'б', 'в', 'г', 'д', 'ж', 'з', 'й', 'к', 'л', 'м', 'н', 'п', 'р', 'с', 'т', 'ф', 'х', 'ц',
    'ч', 'ш', 'щ',
];

/// Latin unless the text contains more Cyrillic than Latin letters.
pub fn detect_script(text: &str) -> Script {
    let mut cyr = 0usize;
    let mut lat = 0usize;
    for ch in text.chars() {
        if ('\u{0400}'..='\u{04FF}').contains(&ch) {
            cyr += 1;
        } else if ch.is_ascii_alphabetic() {
            lat += 1;
        }
    }
    if cyr > lat {
        Script::Cyrillic
    } else {
        Script::Latin
    }
}

pub fn consonant_set(script: Script) -> &'static [char] {
    match script {
        Script::Latin => LATIN_CONSONANTS,
        Script::Cyrillic => CYRILLIC_CONSONANTS,
    }
}

/// Generate one noise token. Deterministic for a fixed rng state.
pub fn gen_symbol(kind: SymbolKind, script: Script, len: usize, rng: &mut impl Rng) -> String {
    let consonants = consonant_set(script);
    match kind {
        SymbolKind::Digits => (0..len)
            .map(|_| char::from_digit(rng.random_range(0..10u32), 10).unwrap())
            .collect(),
        SymbolKind::Letters => (0..len)
            .map(|_| consonants[rng.random_range(0..consonants.len())])
            .collect(),
        SymbolKind::Diglets => {
            // Alternate digit/consonant classes, starting class random.
            let start_digit = rng.random_range(0..2u32) == 0;
            (0..len)
                .map(|i| {
                    if (i % 2 == 0) == start_digit {
                        char::from_digit(rng.random_range(0..10u32), 10).unwrap()
                    } else {
                        consonants[rng.random_range(0..consonants.len())]
                    }
                })
                .collect()
        }
        SymbolKind::Semicolons => core::iter::repeat(';').take(len).collect(),
        SymbolKind::Commas => core::iter::repeat(',').take(len).collect(),
    }
}

/// Pick the token to corrupt, as an index into the mention's own token list.
pub fn select_position(
    mention: &Mention,
    tokens: &[Span],
    position: Position,
    rng: &mut impl Rng,
    dep_roots: Option<&BTreeMap<(usize, usize), usize>>,
    doc_id: &str,
) -> Result<usize, CoreError> {
    let inside: Vec<usize> = tokens
        .iter()
        .enumerate()
        .filter(|(_, t)| mention.span().contains(**t))
        .map(|(i, _)| i)
        .collect();
    let k = inside.len();
    if k == 0 {
        return Err(CoreError::TooShort {
            doc_id: doc_id.to_string(),
            start: mention.start(),
            end: mention.end(),
        });
    }
    match position {
        Position::Start => Ok(0),
        Position::End => Ok(k - 1),
        Position::Middle => Ok((k - 1) / 2),
        Position::Random => Ok(rng.random_range(0..k)),
        Position::Syntax => {
            let missing = || CoreError::MissingDependencyLayer {
                doc_id: doc_id.to_string(),
                start: mention.start(),
                end: mention.end(),
            };
            let roots = dep_roots.ok_or_else(missing)?;
            let doc_index = *roots
                .get(&(mention.start(), mention.end()))
                .ok_or_else(missing)?;
            inside.iter().position(|&i| i == doc_index).ok_or_else(missing)
        }
    }
}

/// One applied replacement, in original-text character coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub orig_start: usize,
    pub orig_end: usize,
    /// The replaced text (one token).
    pub original: String,
    pub replacement: String,
    /// Span of the mention this edit was applied for.
    pub mention_span: (usize, usize),
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    orig_start: usize,
    orig_end: usize,
    corr_start: usize,
    corr_end: usize,
}

/// Monotone piecewise mapping between original and corrupted character
/// offsets. Positions strictly inside an edited region do not map.
#[derive(Debug, Clone)]
pub struct OffsetMap {
    segments: Vec<Segment>,
}

impl OffsetMap {
    pub fn from_edits(edits: &[Edit]) -> OffsetMap {
        let mut segments = Vec::with_capacity(edits.len());
        let mut delta = 0isize;
        for e in edits {
            let corr_start = (e.orig_start as isize + delta) as usize;
            let corr_end = corr_start + e.replacement.chars().count();
            segments.push(Segment {
                orig_start: e.orig_start,
                orig_end: e.orig_end,
                corr_start,
                corr_end,
            });
            delta += corr_end as isize
                - corr_start as isize
                - (e.orig_end as isize - e.orig_start as isize);
        }
        OffsetMap { segments }
    }

    /// Map an original position into corrupted coordinates.
    pub fn to_corrupted(&self, pos: usize) -> Option<usize> {
        let i = self.segments.partition_point(|s| s.orig_end <= pos);
        if let Some(seg) = self.segments.get(i) {
            if seg.orig_start < pos {
                return None; // strictly inside the replaced region
            }
        }
        let delta = match i.checked_sub(1) {
            Some(j) => {
                let s = &self.segments[j];
                s.corr_end as isize - s.orig_end as isize
            }
            None => 0,
        };
        Some((pos as isize + delta) as usize)
    }

    /// Map a corrupted position back into original coordinates.
    pub fn to_original(&self, pos: usize) -> Option<usize> {
        let i = self.segments.partition_point(|s| s.corr_end <= pos);
        if let Some(seg) = self.segments.get(i) {
            if seg.corr_start < pos {
                return None;
            }
        }
        let delta = match i.checked_sub(1) {
            Some(j) => {
                let s = &self.segments[j];
                s.orig_end as isize - s.corr_end as isize
            }
            None => 0,
        };
        Some((pos as isize + delta) as usize)
    }

    /// Does a corrupted-coordinate span intersect any edited region?
    pub fn overlaps_edit(&self, span: Span) -> bool {
        self.segments
            .iter()
            .any(|s| span.start < s.corr_end && s.corr_start < span.end)
    }
}

/// The corrupted text of one document plus everything needed to move spans
/// between the corrupted and original coordinate systems.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorruptionRecord {
    pub doc_id: String,
    pub corrupted_text: String,
    /// Non-overlapping, sorted by `orig_start`.
    pub edits: Vec<Edit>,
}

impl CorruptionRecord {
    pub fn offset_map(&self) -> OffsetMap {
        OffsetMap::from_edits(&self.edits)
    }

    /// The corrupted document: corrupted text with every mention remapped.
    /// Token/sentence/dependency layers are dropped; the edit may change
    /// tokenization.
    pub fn apply(&self, doc: &Document) -> Result<Document, CoreError> {
        let map = self.offset_map();
        let oob = |m: &Mention| CoreError::SpanOutOfBounds {
            doc_id: doc.doc_id().to_string(),
            start: m.start(),
            end: m.end(),
            len: doc.char_len(),
        };
        let mut triples = Vec::with_capacity(doc.mentions().len());
        for m in doc.mentions() {
            let start = map.to_corrupted(m.start()).ok_or_else(|| oob(m))?;
            let end = map.to_corrupted(m.end()).ok_or_else(|| oob(m))?;
            triples.push((start, end, m.entity_type().to_string()));
        }
        Document::new(doc.doc_id(), self.corrupted_text.clone(), triples)
    }
}

/// Apply sorted, non-overlapping edits to a text (character coordinates).
pub fn apply_edits_to_text(text: &str, edits: &[Edit]) -> String {
    let map = crate::types::CharMap::new(text);
    let mut out = String::new();
    let mut prev = 0usize;
    for e in edits {
        out.push_str(map.slice(Span::new(prev, e.orig_start)).unwrap_or_default());
        out.push_str(&e.replacement);
        prev = e.orig_end;
    }
    out.push_str(map.slice(Span::new(prev, map.char_len())).unwrap_or_default());
    out
}

pub(crate) fn fnv1a64(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Per-document rng stream: identical regardless of fold composition or
/// execution order, so parallel corruption stays deterministic.
fn doc_rng(seed: u64, doc_id: &str) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a64(doc_id))
}

/// Corrupt one document: every flat mention with at least `min_words` tokens
/// gets exactly one token replaced by a noise symbol. Shorter mentions are
/// untouched. Same-span mentions share a single edit.
pub fn corrupt_document(
    doc: &Document,
    config: &CorruptionConfig,
) -> Result<CorruptionRecord, CoreError> {
    if let Some((a, b)) = flatness_violation(doc) {
        return Err(not_flat_error(doc, a, b));
    }
    let tokens = doc.effective_tokens();
    let script = detect_script(doc.text());
    let map = doc.char_map();
    let mut rng = doc_rng(config.seed, doc.doc_id());

    // One representative mention per distinct span, in span order.
    let mut by_span: BTreeMap<(usize, usize), &Mention> = BTreeMap::new();
    for m in doc.mentions() {
        by_span.entry((m.start(), m.end())).or_insert(m);
    }

    let mut edits: Vec<Edit> = Vec::new();
    for m in by_span.values() {
        let inside: Vec<Span> = tokens
            .iter()
            .copied()
            .filter(|t| m.span().contains(*t))
            .collect();
        if inside.len() < config.min_words {
            continue;
        }
        let idx = select_position(
            m,
            &tokens,
            config.position,
            &mut rng,
            doc.dep_roots(),
            doc.doc_id(),
        )?;
        let victim = inside[idx];
        let replacement = gen_symbol(config.symbol, script, config.replacement_len, &mut rng);
        edits.push(Edit {
            orig_start: victim.start,
            orig_end: victim.end,
            original: map.slice(victim).unwrap_or_default().to_string(),
            replacement,
            mention_span: (m.start(), m.end()),
        });
    }
    edits.sort_by_key(|e| e.orig_start);

    Ok(CorruptionRecord {
        doc_id: doc.doc_id().to_string(),
        corrupted_text: apply_edits_to_text(doc.text(), &edits),
        edits,
    })
}

/// Balanced assignment of documents to folds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    pub folds: usize,
    pub assignment: BTreeMap<String, usize>,
}

impl FoldPlan {
    pub fn fold_of(&self, doc_id: &str) -> Option<usize> {
        self.assignment.get(doc_id).copied()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = alloc::vec![0usize; self.folds];
        for &f in self.assignment.values() {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Shuffle document ids under the seed and deal them into folds whose sizes
/// differ by at most one.
pub fn make_folds(corpus: &Corpus, folds: usize, seed: u64) -> Result<FoldPlan, CoreError> {
    let n = corpus.documents().len();
    if folds < 2 || n < folds {
        return Err(CoreError::TooFewDocuments { docs: n, folds });
    }
    let mut ids: Vec<&str> = corpus.documents().iter().map(|d| d.doc_id()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher-Yates over the already-sorted id list.
    for i in (1..ids.len()).rev() {
        let j = rng.random_range(0..=i);
        ids.swap(i, j);
    }
    let base = n / folds;
    let rem = n % folds;
    let mut assignment = BTreeMap::new();
    let mut cursor = 0usize;
    for fold in 0..folds {
        let size = base + usize::from(fold < rem);
        for id in &ids[cursor..cursor + size] {
            assignment.insert((*id).to_string(), fold);
        }
        cursor += size;
    }
    Ok(FoldPlan { folds, assignment })
}

/// One fold's datasets. Under the early strategy the train side is corrupted
/// and `records` describe the train documents; under the late strategy the
/// predict side is corrupted and `records` are what `remap_predictions`
/// needs afterwards.
#[derive(Debug, Clone)]
pub struct FoldDataset {
    pub fold: usize,
    pub train: Corpus,
    pub predict: Corpus,
    pub records: Vec<CorruptionRecord>,
}

pub fn emit_fold_datasets(
    corpus: &Corpus,
    config: &CorruptionConfig,
) -> Result<Vec<FoldDataset>, CoreError> {
    let plan = make_folds(corpus, config.folds, config.seed)?;
    let mut out = Vec::with_capacity(config.folds);
    for fold in 0..config.folds {
        let mut train_docs = Vec::new();
        let mut predict_docs = Vec::new();
        let mut records = Vec::new();
        for doc in corpus.documents() {
            let in_predict = plan.fold_of(doc.doc_id()) == Some(fold);
            let corrupt_this = match config.strategy {
                Strategy::Early => !in_predict,
                Strategy::Late => in_predict,
            };
            let built = if corrupt_this {
                let record = corrupt_document(doc, config)?;
                let corrupted = record.apply(doc)?;
                records.push(record);
                corrupted
            } else {
                doc.clone()
            };
            if in_predict {
                predict_docs.push(built);
            } else {
                train_docs.push(built);
            }
        }
        let name = |side: &str| alloc::format!("{}.fold{}.{}", corpus.split_name(), fold, side);
        out.push(FoldDataset {
            fold,
            train: Corpus::new(name("train"), train_docs, corpus.type_inventory().to_vec())?,
            predict: Corpus::new(name("predict"), predict_docs, corpus.type_inventory().to_vec())?,
            records,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RemapStats {
    pub remapped: usize,
    /// Predictions intersecting an edited region; these have no defined
    /// interpretation on the original text and are dropped.
    pub dropped_overlapping: usize,
}

/// Translate predictions made over corrupted text back onto the original
/// documents. Surfaces are re-derived from the original text.
pub fn remap_predictions(
    preds: &Corpus,
    records: &[CorruptionRecord],
    original: &Corpus,
) -> Result<(Corpus, RemapStats), CoreError> {
    let by_id: BTreeMap<&str, &CorruptionRecord> =
        records.iter().map(|r| (r.doc_id.as_str(), r)).collect();
    let mut stats = RemapStats::default();
    let mut docs = Vec::with_capacity(preds.documents().len());
    for pdoc in preds.documents() {
        let record = by_id
            .get(pdoc.doc_id())
            .ok_or_else(|| CoreError::UnknownDoc(pdoc.doc_id().to_string()))?;
        let orig = original
            .document(pdoc.doc_id())
            .ok_or_else(|| CoreError::UnknownDoc(pdoc.doc_id().to_string()))?;
        let map = record.offset_map();
        let mut triples = Vec::new();
        for m in pdoc.mentions() {
            if map.overlaps_edit(m.span()) {
                stats.dropped_overlapping += 1;
                continue;
            }
            match (map.to_original(m.start()), map.to_original(m.end())) {
                (Some(s), Some(e)) => {
                    triples.push((s, e, m.entity_type().to_string()));
                    stats.remapped += 1;
                }
                _ => stats.dropped_overlapping += 1,
            }
        }
        docs.push(Document::new(orig.doc_id(), orig.text(), triples)?);
    }
    let corpus = Corpus::new(preds.split_name(), docs, preds.type_inventory().to_vec())?;
    Ok((corpus, stats))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PseudoMergeStats {
    pub kept: usize,
    /// Prediction duplicated an existing flat mention (same span and type).
    pub dropped_flat_duplicate: usize,
    /// Prediction was not a proper sub-span of any flat mention.
    pub dropped_not_nested: usize,
}

/// Keep predictions that are proper sub-spans of some flat mention and merge
/// them with the flat corpus as pseudo-nested annotations.
pub fn build_pseudo_nested(
    flat: &Corpus,
    preds: &Corpus,
) -> Result<(Corpus, PseudoMergeStats), CoreError> {
    let mut stats = PseudoMergeStats::default();
    let mut docs = Vec::with_capacity(flat.documents().len());
    let mut extra_types: BTreeSet<String> = BTreeSet::new();
    for fdoc in flat.documents() {
        let flat_keys: BTreeSet<(usize, usize, String)> =
            fdoc.mentions().iter().map(|m| m.to_triple()).collect();
        let mut triples: Vec<(usize, usize, String)> = flat_keys.iter().cloned().collect();
        if let Some(pdoc) = preds.document(fdoc.doc_id()) {
            for p in pdoc.mentions() {
                if flat_keys.contains(&p.to_triple()) {
                    stats.dropped_flat_duplicate += 1;
                    continue;
                }
                let nested = fdoc
                    .mentions()
                    .iter()
                    .any(|f| f.span().strictly_contains(p.span()));
                if nested {
                    stats.kept += 1;
                    extra_types.insert(p.entity_type().to_string());
                    triples.push(p.to_triple());
                } else {
                    stats.dropped_not_nested += 1;
                }
            }
        }
        docs.push(Document::new(fdoc.doc_id(), fdoc.text(), triples)?);
    }
    let mut inventory = flat.type_inventory().to_vec();
    for t in extra_types {
        if !inventory.iter().any(|x| *x == t) {
            inventory.push(t);
        }
    }
    let corpus = Corpus::new(flat.split_name(), docs, inventory)?;
    Ok((corpus, stats))
}
