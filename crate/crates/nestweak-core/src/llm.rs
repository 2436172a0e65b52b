//! Prompt assembly and response parsing for LLM-based nested-entity
//! extraction. Everything here is pure: the chat endpoint itself (HTTP,
//! mock, transcript replay) lives in the companion crate.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::lemma::{canonical_form, LemmaDictionary};
use crate::types::{CharMap, Corpus, Mention, Span};

/// Generation parameters sent with every request. Defaults follow the
/// near-deterministic setup: temperature 0, top-p 1.0, 5000 output tokens,
/// repetition penalty 1.05 (1.05..=1.1 is the intended range).
#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub model: String,
    pub temperature: f64,
    pub top_p: f64,
    pub max_tokens: u32,
    pub repetition_penalty: f64,
}

impl Default for GenParams {
    fn default() -> GenParams {
        GenParams {
            model: "local".to_string(),
            temperature: 0.0,
            top_p: 1.0,
            max_tokens: 5000,
            repetition_penalty: 1.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn user(content: impl Into<String>) -> ChatMessage {
        ChatMessage {
            role: "user".to_string(),
            content: content.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub params: GenParams,
    pub messages: Vec<ChatMessage>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub text: String,
    pub finish_reason: String,
    pub latency_ms: u64,
}

/// Few-shot example selection strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectionStrategy {
    /// Sentences drawn uniformly at random (seeded).
    Random,
    /// Sentences containing the most frequent entity surfaces.
    Mfe,
    /// Per-type list of the most frequent surfaces, appended to the prompt.
    MfeEntwise,
    /// Like `MfeEntwise` but frequencies are pooled over canonical-form
    /// groups; each group is shown by its most frequent surface.
    MfeEntwiseSent,
}

/// Everything needed to build prompts for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptSpec {
    /// Base instruction text (the shipped template asset).
    pub template: String,
    pub shots: u8,
    pub selection: SelectionStrategy,
    /// Optional per-type definition text appended after the template.
    pub definitions: Option<BTreeMap<String, String>>,
    /// Optional per-type nesting-pattern text.
    pub nesting_patterns: Option<BTreeMap<String, String>>,
    pub seed: u64,
}

impl PromptSpec {
    pub fn new(
        template: impl Into<String>,
        shots: u8,
        selection: SelectionStrategy,
        seed: u64,
    ) -> Result<PromptSpec, CoreError> {
        if !matches!(shots, 0 | 1 | 5) {
            return Err(CoreError::InvalidShots(shots));
        }
        Ok(PromptSpec {
            template: template.into(),
            shots,
            selection,
            definitions: None,
            nesting_patterns: None,
            seed,
        })
    }
}

/// How many surfaces the per-type lists show.
const TOP_SURFACES_PER_TYPE: usize = 3;

struct SentenceEntry {
    text: String,
    /// Mentions fully inside the sentence, offsets relative to the document.
    mentions: Vec<(String, String)>,
}

fn sentence_entries(train: &Corpus) -> Vec<SentenceEntry> {
    let mut out = Vec::new();
    for doc in train.documents() {
        let map = doc.char_map();
        for sent in doc.sentences_or_heuristic() {
            let mentions: Vec<(String, String)> = doc
                .mentions()
                .iter()
                .filter(|m| sent.contains(m.span()))
                .map(|m| (m.surface().to_string(), m.entity_type().to_string()))
                .collect();
            if let Some(text) = map.slice(sent) {
                out.push(SentenceEntry {
                    text: text.to_string(),
                    mentions,
                });
            }
        }
    }
    out
}

fn render_sentence_example(entry: &SentenceEntry) -> String {
    let mut obj = serde_json::Map::new();
    for (surface, entity_type) in &entry.mentions {
        obj.entry(surface.clone())
            .or_insert(serde_json::Value::String(entity_type.clone()));
    }
    let json = serde_json::Value::Object(obj);
    alloc::format!("Text: {}\nAnswer: ```{}```", entry.text, json)
}

/// Surface frequencies over all mentions, ranked by count then surface.
fn ranked_surfaces(train: &Corpus) -> Vec<(String, usize)> {
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for doc in train.documents() {
        for m in doc.mentions() {
            *counts.entry(m.surface().to_string()).or_insert(0) += 1;
        }
    }
    let mut ranked: Vec<(String, usize)> = counts.into_iter().collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked
}

/// Build the example block for a prompt spec.
///
/// Sentence strategies return `shots` rendered text/answer pairs; the
/// entity-wise strategies return the per-type surface list instead.
pub fn select_examples(
    train: &Corpus,
    spec: &PromptSpec,
    dict: &LemmaDictionary,
) -> Result<String, CoreError> {
    if !matches!(spec.shots, 0 | 1 | 5) {
        return Err(CoreError::InvalidShots(spec.shots));
    }
    if train.documents().is_empty() {
        return Err(CoreError::EmptyTrain);
    }
    match spec.selection {
        SelectionStrategy::Random => {
            if spec.shots == 0 {
                return Ok(String::new());
            }
            let entries = sentence_entries(train);
            if entries.is_empty() {
                return Err(CoreError::EmptyTrain);
            }
            let mut order: Vec<usize> = (0..entries.len()).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for i in (1..order.len()).rev() {
                let j = rand::Rng::random_range(&mut rng, 0..=i);
                order.swap(i, j);
            }
            let picked: Vec<String> = order
                .into_iter()
                .take(spec.shots as usize)
                .map(|i| render_sentence_example(&entries[i]))
                .collect();
            Ok(picked.join("\n\n"))
        }
        SelectionStrategy::Mfe => {
            if spec.shots == 0 {
                return Ok(String::new());
            }
            let entries = sentence_entries(train);
            if entries.is_empty() {
                return Err(CoreError::EmptyTrain);
            }
            let mut picked: Vec<usize> = Vec::new();
            for (surface, _) in ranked_surfaces(train) {
                if picked.len() >= spec.shots as usize {
                    break;
                }
                // First sentence (document order, then sentence order)
                // containing a mention with this surface.
                let hit = entries.iter().enumerate().find_map(|(i, e)| {
                    (e.mentions.iter().any(|(s, _)| *s == surface) && !picked.contains(&i))
                        .then_some(i)
                });
                if let Some(i) = hit {
                    picked.push(i);
                }
            }
            let rendered: Vec<String> = picked
                .into_iter()
                .map(|i| render_sentence_example(&entries[i]))
                .collect();
            Ok(rendered.join("\n\n"))
        }
        SelectionStrategy::MfeEntwise => Ok(per_type_surface_list(train, None)),
        SelectionStrategy::MfeEntwiseSent => Ok(per_type_surface_list(train, Some(dict))),
    }
}

/// `TYPE: s1, s2, s3` lines in inventory order. With a dictionary, surface
/// counts are pooled by canonical form and each group is represented by its
/// most frequent surface.
fn per_type_surface_list(train: &Corpus, dict: Option<&LemmaDictionary>) -> String {
    let mut lines = Vec::new();
    for entity_type in train.type_inventory() {
        // group key -> (count, surface counts)
        let mut groups: BTreeMap<String, (usize, BTreeMap<String, usize>)> = BTreeMap::new();
        for doc in train.documents() {
            for m in doc.mentions() {
                if m.entity_type() != entity_type {
                    continue;
                }
                let key = match dict {
                    Some(d) => canonical_form(m.surface(), d),
                    None => m.surface().to_string(),
                };
                let group = groups.entry(key).or_default();
                group.0 += 1;
                *group.1.entry(m.surface().to_string()).or_insert(0) += 1;
            }
        }
        if groups.is_empty() {
            continue;
        }
        let mut ranked: Vec<(String, usize, BTreeMap<String, usize>)> = groups
            .into_iter()
            .map(|(k, (c, surfaces))| (k, c, surfaces))
            .collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let tops: Vec<String> = ranked
            .into_iter()
            .take(TOP_SURFACES_PER_TYPE)
            .map(|(_, _, surfaces)| {
                let mut by_count: Vec<(&String, &usize)> = surfaces.iter().collect();
                by_count.sort_by(|a, b| b.1.cmp(a.1).then(a.0.cmp(b.0)));
                by_count[0].0.clone()
            })
            .collect();
        lines.push(alloc::format!("{}: {}", entity_type, tops.join(", ")));
    }
    lines.join("\n")
}

fn definitions_block(defs: &BTreeMap<String, String>) -> String {
    defs.iter()
        .map(|(t, d)| alloc::format!("{t}: {d}"))
        .collect::<Vec<String>>()
        .join("\n")
}

/// Assemble the message list for a pure-extraction request over `text`.
/// Byte-stable for fixed inputs.
pub fn build_prompt(
    text: &str,
    spec: &PromptSpec,
    examples: &str,
) -> Result<Vec<ChatMessage>, CoreError> {
    if spec.template.trim().is_empty() {
        return Err(CoreError::MissingAsset);
    }
    let mut sections: Vec<String> = Vec::new();
    sections.push(spec.template.trim_end().to_string());
    if let Some(defs) = &spec.definitions {
        sections.push(definitions_block(defs));
    }
    if let Some(patterns) = &spec.nesting_patterns {
        let all: Vec<String> = patterns.values().map(|p| p.trim().to_string()).collect();
        if !all.is_empty() {
            sections.push(all.join("\n\n"));
        }
    }
    if !examples.is_empty() {
        sections.push(alloc::format!("Examples:\n{examples}"));
    }
    sections.push(alloc::format!("Text: {text}"));
    Ok(alloc::vec![ChatMessage::user(sections.join("\n\n"))])
}

/// Assemble the message list for one hybrid request: the outer entity's
/// surface, its predicted type, and that type's nesting-pattern text.
pub fn build_hybrid_prompt(
    outer_surface: &str,
    outer_type: &str,
    spec: &PromptSpec,
) -> Result<Vec<ChatMessage>, CoreError> {
    if spec.template.trim().is_empty() {
        return Err(CoreError::MissingAsset);
    }
    let mut sections: Vec<String> = Vec::new();
    sections.push(spec.template.trim_end().to_string());
    if let Some(defs) = &spec.definitions {
        sections.push(definitions_block(defs));
    }
    if let Some(pattern) = spec
        .nesting_patterns
        .as_ref()
        .and_then(|p| p.get(outer_type))
    {
        sections.push(pattern.trim().to_string());
    }
    sections.push(alloc::format!("Outer entity type: {outer_type}"));
    sections.push(alloc::format!("Text: {outer_surface}"));
    Ok(alloc::vec![ChatMessage::user(sections.join("\n\n"))])
}

/// Offset resolution policy for predicted strings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Occurrence {
    /// Resolve each predicted string to its first occurrence.
    First,
    /// Resolve to every (non-overlapping) occurrence.
    All,
}

/// Why a predicted pair (or a whole response) was discarded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Discard {
    /// No fenced block, or the block is not a JSON object.
    ParseFailure { detail: String },
    /// Object value was not a string.
    NonStringValue { key: String },
    /// The predicted string does not occur in the source text.
    SurfaceNotFound {
        surface: String,
        entity_type: String,
    },
}

/// One prediction with resolved character offsets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct ResolvedEntity {
    pub start: usize,
    pub end: usize,
    pub surface: String,
    pub entity_type: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedPrediction {
    pub entities: Vec<ResolvedEntity>,
    pub discards: Vec<Discard>,
}

/// Text between the first pair of triple backticks. An unterminated fence
/// extends to the end of the response (truncated generations).
fn extract_fenced(raw: &str) -> Option<&str> {
    let open = raw.find("```")?;
    let rest = &raw[open + 3..];
    match rest.find("```") {
        Some(close) => Some(&rest[..close]),
        None => Some(rest),
    }
}

/// Drop a leading language tag like `json` right after the opening fence.
fn strip_language_tag(block: &str) -> &str {
    if let Some(nl) = block.find('\n') {
        let first = block[..nl].trim();
        let tag_like = !first.is_empty()
            && first.len() <= 16
            && first
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '+');
        if tag_like {
            return &block[nl + 1..];
        }
    }
    block
}

/// Remove commas that directly precede a closing `}` or `]`, outside of
/// string literals.
fn strip_trailing_commas(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::with_capacity(s.len());
    let mut in_string = false;
    let mut escaped = false;
    for (i, &c) in chars.iter().enumerate() {
        if in_string {
            out.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '"' {
                in_string = false;
            }
            continue;
        }
        match c {
            '"' => {
                in_string = true;
                out.push(c);
            }
            ',' => {
                let next = chars[i + 1..].iter().find(|ch| !ch.is_whitespace());
                if !matches!(next, Some('}') | Some(']')) {
                    out.push(c);
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// All non-overlapping occurrences of `needle` in `haystack`, as character
/// spans.
pub fn find_occurrences(haystack: &str, needle: &str) -> Vec<Span> {
    if needle.is_empty() {
        return Vec::new();
    }
    let map = CharMap::new(haystack);
    let needle_chars = needle.chars().count();
    haystack
        .match_indices(needle)
        .filter_map(|(byte, _)| map.char_of_byte(byte))
        .map(|start| Span::new(start, start + needle_chars))
        .collect()
}

/// Parse a raw model response against its source text.
///
/// The fenced block is extracted, formatting artifacts stripped (language
/// tag, surrounding whitespace, trailing commas), and the result parsed as a
/// JSON object of `{entity: type}` pairs. Each entity string is resolved to
/// character offsets by exact occurrence; strings that do not occur are
/// discarded. Types outside any inventory are retained as-is. Every failure
/// mode degrades to a logged discard, never an error.
pub fn parse_response(raw: &str, source_text: &str, occurrence: Occurrence) -> ParsedPrediction {
    let mut parsed = ParsedPrediction::default();
    let Some(block) = extract_fenced(raw) else {
        parsed.discards.push(Discard::ParseFailure {
            detail: "no fenced block".to_string(),
        });
        return parsed;
    };
    let cleaned = strip_trailing_commas(strip_language_tag(block).trim());
    let value: serde_json::Value = match serde_json::from_str(&cleaned) {
        Ok(v) => v,
        Err(e) => {
            parsed.discards.push(Discard::ParseFailure {
                detail: alloc::format!("invalid JSON: {e}"),
            });
            return parsed;
        }
    };
    let Some(object) = value.as_object() else {
        parsed.discards.push(Discard::ParseFailure {
            detail: "not a JSON object".to_string(),
        });
        return parsed;
    };
    for (surface, type_value) in object {
        let Some(entity_type) = type_value.as_str() else {
            parsed.discards.push(Discard::NonStringValue {
                key: surface.clone(),
            });
            continue;
        };
        let spans = find_occurrences(source_text, surface);
        if spans.is_empty() {
            parsed.discards.push(Discard::SurfaceNotFound {
                surface: surface.clone(),
                entity_type: entity_type.to_string(),
            });
            continue;
        }
        let take = match occurrence {
            Occurrence::First => 1,
            Occurrence::All => spans.len(),
        };
        for span in spans.into_iter().take(take) {
            parsed.entities.push(ResolvedEntity {
                start: span.start,
                end: span.end,
                surface: surface.clone(),
                entity_type: entity_type.to_string(),
            });
        }
    }
    parsed.entities.sort();
    parsed.entities.dedup();
    parsed
}

/// Find a token window of `span_text` whose canonical form equals the
/// canonical form of `surface`. Windows are constrained to the prediction's
/// token count; the earliest window wins.
pub fn canonical_window_match(
    span_text: &str,
    surface: &str,
    dict: &LemmaDictionary,
) -> Option<Span> {
    let target = canonical_form(surface, dict);
    if target.is_empty() {
        return None;
    }
    let want_tokens = crate::types::tokenize_str(surface).len();
    let tokens = crate::types::tokenize(span_text);
    if want_tokens == 0 || tokens.len() < want_tokens {
        return None;
    }
    let map = CharMap::new(span_text);
    for i in 0..=tokens.len() - want_tokens {
        let window = Span::new(tokens[i].start, tokens[i + want_tokens - 1].end);
        let text = map.slice(window)?;
        if canonical_form(text, dict) == target {
            return Some(window);
        }
    }
    None
}

/// Parse a hybrid response against one outer span's surface text. When
/// `lemma_fallback` is given, predicted strings that fail exact occurrence
/// are retried by canonical-form matching over token windows.
pub fn parse_hybrid_response(
    raw: &str,
    outer: &Mention,
    occurrence: Occurrence,
    lemma_fallback: Option<&LemmaDictionary>,
) -> ParsedPrediction {
    let mut parsed = parse_response(raw, outer.surface(), occurrence);
    if let Some(dict) = lemma_fallback {
        let mut kept = Vec::new();
        for discard in core::mem::take(&mut parsed.discards) {
            if let Discard::SurfaceNotFound {
                surface,
                entity_type,
            } = &discard
            {
                if let Some(window) = canonical_window_match(outer.surface(), surface, dict) {
                    parsed.entities.push(ResolvedEntity {
                        start: window.start,
                        end: window.end,
                        surface: surface.clone(),
                        entity_type: entity_type.clone(),
                    });
                    continue;
                }
            }
            kept.push(discard);
        }
        parsed.discards = kept;
        parsed.entities.sort();
        parsed.entities.dedup();
    }
    parsed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::Document;

    fn doc(id: &str, text: &str, mentions: Vec<(usize, usize, &str)>) -> Document {
        Document::new(
            id,
            text,
            mentions
                .into_iter()
                .map(|(s, e, t)| (s, e, t.to_string()))
                .collect::<Vec<_>>(),
        )
        .unwrap()
    }

    fn train_fixture() -> Corpus {
        let d1 = doc(
            "a",
            "Россия выиграла. США против.",
            vec![(0, 6, "COUNTRY"), (17, 20, "COUNTRY")],
        );
        let d2 = doc(
            "b",
            "США и Москва. России нет.",
            vec![(0, 3, "COUNTRY"), (6, 12, "CITY"), (14, 20, "COUNTRY")],
        );
        Corpus::from_documents("train", vec![d1, d2]).unwrap()
    }

    #[test]
    fn zero_shot_yields_empty_block() {
        let spec = PromptSpec::new("template", 0, SelectionStrategy::Random, 1).unwrap();
        let block = select_examples(&train_fixture(), &spec, &LemmaDictionary::empty()).unwrap();
        assert!(block.is_empty());
    }

    #[test]
    fn invalid_shot_count_rejected() {
        assert!(matches!(
            PromptSpec::new("t", 3, SelectionStrategy::Random, 1),
            Err(CoreError::InvalidShots(3))
        ));
    }

    #[test]
    fn random_selection_is_seeded() {
        let spec = PromptSpec::new("t", 1, SelectionStrategy::Random, 9).unwrap();
        let a = select_examples(&train_fixture(), &spec, &LemmaDictionary::empty()).unwrap();
        let b = select_examples(&train_fixture(), &spec, &LemmaDictionary::empty()).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("Text: "));
        assert!(a.contains("Answer: ```"));
    }

    #[test]
    fn mfe_picks_sentences_with_most_frequent_surfaces() {
        // "США" occurs twice, everything else once: the first example must
        // be a sentence containing США.
        let spec = PromptSpec::new("t", 1, SelectionStrategy::Mfe, 1).unwrap();
        let block = select_examples(&train_fixture(), &spec, &LemmaDictionary::empty()).unwrap();
        assert!(block.contains("США"));
    }

    #[test]
    fn entwise_lists_top_surfaces_per_type() {
        let spec = PromptSpec::new("t", 5, SelectionStrategy::MfeEntwise, 1).unwrap();
        let block = select_examples(&train_fixture(), &spec, &LemmaDictionary::empty()).unwrap();
        let lines: Vec<&str> = block.lines().collect();
        assert_eq!(lines.len(), 2); // CITY and COUNTRY
        assert!(lines[0].starts_with("CITY: "));
        assert!(lines[1].starts_with("COUNTRY: "));
        // США is the most frequent COUNTRY surface
        assert!(lines[1].starts_with("COUNTRY: США"));
    }

    #[test]
    fn entwise_sent_pools_inflected_forms() {
        // России/Россия pool into one group under the dictionary; the
        // representative is the most frequent surface of the group.
        let d1 = doc("a", "Россия победила", vec![(0, 6, "COUNTRY")]);
        let d2 = doc("b", "Россия снова", vec![(0, 6, "COUNTRY")]);
        let d3 = doc("c", "России нет", vec![(0, 6, "COUNTRY")]);
        let d4 = doc("d", "США рядом", vec![(0, 3, "COUNTRY")]);
        let d5 = doc("e", "США тоже", vec![(0, 3, "COUNTRY")]);
        let d6 = doc("f", "США опять", vec![(0, 3, "COUNTRY")]);
        let d7 = doc("g", "США ещё", vec![(0, 3, "COUNTRY")]);
        let train = Corpus::from_documents("t", vec![d1, d2, d3, d4, d5, d6, d7]).unwrap();
        let dict = LemmaDictionary::from_pairs(vec![("россии", "россия"), ("россия", "россия")]);

        // Without pooling, Россия (2) and России (1) compete separately.
        let spec = PromptSpec::new("t", 5, SelectionStrategy::MfeEntwise, 1).unwrap();
        let plain = select_examples(&train, &spec, &dict).unwrap();
        assert_eq!(plain, "COUNTRY: США, Россия, России");

        // With pooling the group counts 3 and is represented by Россия.
        let spec = PromptSpec::new("t", 5, SelectionStrategy::MfeEntwiseSent, 1).unwrap();
        let pooled = select_examples(&train, &spec, &dict).unwrap();
        assert_eq!(pooled, "COUNTRY: США, Россия");
    }

    #[test]
    fn empty_train_is_an_error() {
        let empty = Corpus::from_documents("t", vec![]).unwrap();
        let spec = PromptSpec::new("t", 1, SelectionStrategy::Random, 1).unwrap();
        assert!(matches!(
            select_examples(&empty, &spec, &LemmaDictionary::empty()),
            Err(CoreError::EmptyTrain)
        ));
    }

    #[test]
    fn prompt_is_template_plus_text_for_zero_shot() {
        let spec = PromptSpec::new("INSTRUCTIONS", 0, SelectionStrategy::Random, 1).unwrap();
        let msgs = build_prompt("Russia won.", &spec, "").unwrap();
        assert_eq!(msgs.len(), 1);
        assert_eq!(msgs[0].role, "user");
        assert_eq!(msgs[0].content, "INSTRUCTIONS\n\nText: Russia won.");
    }

    #[test]
    fn prompt_is_byte_stable() {
        let mut spec = PromptSpec::new("I", 5, SelectionStrategy::Mfe, 1).unwrap();
        let mut defs = BTreeMap::new();
        defs.insert("COUNTRY".to_string(), "Страна".to_string());
        spec.definitions = Some(defs);
        let a = build_prompt("x", &spec, "ex").unwrap();
        let b = build_prompt("x", &spec, "ex").unwrap();
        assert_eq!(a, b);
        assert!(a[0].content.contains("COUNTRY: Страна"));
        assert!(a[0].content.contains("Examples:\nex"));
    }

    #[test]
    fn missing_template_is_an_error() {
        let spec = PromptSpec::new("  ", 0, SelectionStrategy::Random, 1).unwrap();
        assert!(matches!(
            build_prompt("x", &spec, ""),
            Err(CoreError::MissingAsset)
        ));
    }

    #[test]
    fn hybrid_prompt_carries_type_and_pattern() {
        let mut spec = PromptSpec::new("I", 0, SelectionStrategy::Random, 1).unwrap();
        let mut patterns = BTreeMap::new();
        patterns.insert(
            "ORGANIZATION".to_string(),
            "For class ORGANIZATION most common nested entity classes are: ORGANIZATION, COUNTRY, EVENT".to_string(),
        );
        spec.nesting_patterns = Some(patterns);
        let msgs = build_hybrid_prompt("Министерство", "ORGANIZATION", &spec).unwrap();
        let content = &msgs[0].content;
        assert!(content.contains("most common nested entity classes are: ORGANIZATION, COUNTRY, EVENT"));
        assert!(content.contains("Outer entity type: ORGANIZATION"));
        assert!(content.contains("Text: Министерство"));
        // a type with no pattern entry just omits that section
        let msgs = build_hybrid_prompt("x", "DATE", &spec).unwrap();
        assert!(!msgs[0].content.contains("nested entity classes"));
        assert!(msgs[0].content.contains("Outer entity type: DATE"));
    }

    #[test]
    fn valid_fenced_json_resolves_offsets() {
        let parsed = parse_response(
            "```{\"Russia\": \"COUNTRY\"}```",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.discards.len(), 0);
        assert_eq!(parsed.entities.len(), 1);
        let e = &parsed.entities[0];
        assert_eq!((e.start, e.end, e.entity_type.as_str()), (0, 6, "COUNTRY"));
    }

    #[test]
    fn missing_fence_is_empty_with_logged_failure() {
        let parsed = parse_response("{\"Russia\": \"COUNTRY\"}", "Russia won.", Occurrence::First);
        assert!(parsed.entities.is_empty());
        assert!(matches!(parsed.discards[0], Discard::ParseFailure { .. }));
    }

    #[test]
    fn malformed_json_is_empty_with_logged_failure() {
        let parsed = parse_response("```{Russia: COUNTRY}```", "Russia won.", Occurrence::First);
        assert!(parsed.entities.is_empty());
        assert!(matches!(parsed.discards[0], Discard::ParseFailure { .. }));
    }

    #[test]
    fn non_occurring_surface_is_discarded() {
        let parsed = parse_response(
            "```{\"Mars\": \"LOCATION\", \"Russia\": \"COUNTRY\"}```",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.entities.len(), 1);
        assert!(matches!(
            &parsed.discards[0],
            Discard::SurfaceNotFound { surface, .. } if surface == "Mars"
        ));
    }

    #[test]
    fn language_tag_and_trailing_comma_are_stripped() {
        let parsed = parse_response(
            "```json\n{\"Russia\": \"COUNTRY\",}\n```",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.entities.len(), 1);
        assert!(parsed.discards.is_empty());
    }

    #[test]
    fn commas_inside_strings_survive_stripping() {
        let parsed = parse_response(
            "```{\"a, b\": \"X\"}```",
            "see a, b here",
            Occurrence::First,
        );
        assert_eq!(parsed.entities.len(), 1);
        assert_eq!(parsed.entities[0].surface, "a, b");
    }

    #[test]
    fn unterminated_fence_extends_to_end() {
        let parsed = parse_response(
            "```{\"Russia\": \"COUNTRY\"}",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.entities.len(), 1);
    }

    #[test]
    fn out_of_inventory_type_is_retained() {
        let parsed = parse_response(
            "```{\"Russia\": \"PLANET\"}```",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.entities[0].entity_type, "PLANET");
    }

    #[test]
    fn non_string_value_is_discarded_pairwise() {
        let parsed = parse_response(
            "```{\"Russia\": [\"COUNTRY\"], \"won\": \"EVENT\"}```",
            "Russia won.",
            Occurrence::First,
        );
        assert_eq!(parsed.entities.len(), 1);
        assert!(matches!(
            &parsed.discards[0],
            Discard::NonStringValue { key } if key == "Russia"
        ));
    }

    #[test]
    fn unicode_surfaces_resolve_to_char_offsets() {
        let parsed = parse_response(
            "```{\"Россия\": \"COUNTRY\"}```",
            "Сегодня Россия выиграла",
            Occurrence::First,
        );
        let e = &parsed.entities[0];
        assert_eq!((e.start, e.end), (8, 14));
    }

    #[test]
    fn occurrence_policy_first_vs_all() {
        let text = "Russia and Russia";
        let raw = "```{\"Russia\": \"COUNTRY\"}```";
        let first = parse_response(raw, text, Occurrence::First);
        assert_eq!(first.entities.len(), 1);
        assert_eq!(first.entities[0].start, 0);
        let all = parse_response(raw, text, Occurrence::All);
        let spans: Vec<(usize, usize)> = all.entities.iter().map(|e| (e.start, e.end)).collect();
        assert_eq!(spans, vec![(0, 6), (11, 17)]);
    }

    #[test]
    fn empty_and_array_responses_degrade() {
        let a = parse_response("``````", "x", Occurrence::First);
        assert!(matches!(a.discards[0], Discard::ParseFailure { .. }));
        let b = parse_response("```[1, 2]```", "x", Occurrence::First);
        assert!(matches!(b.discards[0], Discard::ParseFailure { .. }));
    }

    #[test]
    fn hybrid_lemma_fallback_resolves_inflected_surface() {
        let d = doc("d", "МИД России сообщил", vec![(0, 10, "ORGANIZATION")]);
        let outer = &d.mentions()[0];
        let dict = LemmaDictionary::from_pairs(vec![("россии", "россия"), ("россия", "россия")]);
        let raw = "```{\"Россия\": \"COUNTRY\"}```";
        // Without fallback the surface does not occur.
        let plain = parse_hybrid_response(raw, outer, Occurrence::First, None);
        assert!(plain.entities.is_empty());
        // With fallback the window "России" matches canonically.
        let resolved = parse_hybrid_response(raw, outer, Occurrence::First, Some(&dict));
        assert_eq!(resolved.entities.len(), 1);
        let e = &resolved.entities[0];
        assert_eq!((e.start, e.end), (4, 10));
        assert!(resolved.discards.is_empty());
    }

    #[test]
    fn sentence_example_renders_json_answer() {
        let entry = SentenceEntry {
            text: "Russia won".to_string(),
            mentions: vec![("Russia".to_string(), "COUNTRY".to_string())],
        };
        assert_eq!(
            render_sentence_example(&entry),
            "Text: Russia won\nAnswer: ```{\"Russia\":\"COUNTRY\"}```"
        );
    }
}
