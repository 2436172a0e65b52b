//! Property tests over generated corpora: flatten semantics, standoff
//! round trips, inclusion containment, corruption offset bookkeeping, span
//! partition coverage, and evaluation self-consistency.

use std::collections::BTreeSet;

use proptest::prelude::*;

use nestweak_core::brat::{parse_brat, write_brat};
use nestweak_core::corruption::{
    corrupt_document, CorruptionConfig, Position, Strategy as DamageStrategy, SymbolKind,
};
use nestweak_core::evaluation::{classify_inner_outer, evaluate, ContainmentRule};
use nestweak_core::inclusions::{build_surface_index, extract_inclusions, score_inclusions, MatchMode};
use nestweak_core::lemma::LemmaDictionary;
use nestweak_core::nesting::{corpus_stats, flatten};
use nestweak_core::neutralization::{enumerate_spans, partition_spans, LabelKind, MatchKind, PartitionMode};
use nestweak_core::{Corpus, Document, Mention, Span};

const VOCAB: [&str; 8] = ["alpha", "beta", "gamma", "delta", "ru", "omega", "phi", "chi"];
const TYPES: [&str; 3] = ["ORG", "LOC", "PER"];

/// Build a document from word indices plus raw (token_start, token_len,
/// type) requests; requests that would cross an already kept span are
/// dropped, so the result is nested/disjoint (never crossing).
fn build_doc(id: String, words: &[usize], raw: &[(usize, usize, usize)]) -> Document {
    let tokens: Vec<&str> = words.iter().map(|&w| VOCAB[w % VOCAB.len()]).collect();
    let text = tokens.join(" ");
    let mut offsets = Vec::new();
    let mut pos = 0usize;
    for t in &tokens {
        let len = t.chars().count();
        offsets.push((pos, pos + len));
        pos += len + 1;
    }
    let mut kept: Vec<(usize, usize, String)> = Vec::new();
    for &(start, len, ty) in raw {
        if tokens.is_empty() {
            break;
        }
        let a = start % tokens.len();
        let b = (a + 1 + len % 4).min(tokens.len());
        let span = Span::new(offsets[a].0, offsets[b - 1].1);
        let compatible = kept.iter().all(|&(s, e, _)| {
            let other = Span::new(s, e);
            !span.overlaps(other) || span.contains(other) || other.contains(span)
        });
        if compatible {
            kept.push((span.start, span.end, TYPES[ty % TYPES.len()].to_string()));
        }
    }
    Document::new(id, text, kept).unwrap()
}

fn arb_doc(id: usize) -> impl Strategy<Value = Document> {
    (
        proptest::collection::vec(0usize..VOCAB.len(), 3..20),
        proptest::collection::vec((0usize..20, 0usize..6, 0usize..TYPES.len()), 0..10),
    )
        .prop_map(move |(words, raw)| build_doc(format!("doc{id:03}"), &words, &raw))
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    proptest::collection::vec(0u8..1, 1..5).prop_flat_map(|docs| {
        let strategies: Vec<_> = (0..docs.len()).map(arb_doc).collect();
        strategies.prop_map(|docs| Corpus::from_documents("gen", docs).unwrap())
    })
}

fn keyset(doc: &Document) -> BTreeSet<(usize, usize, String)> {
    doc.mentions().iter().map(|m| m.to_triple()).collect()
}

proptest! {
    #[test]
    fn flatten_is_idempotent_and_overlap_free(corpus in arb_corpus()) {
        let once = flatten(&corpus).unwrap();
        let twice = flatten(&once).unwrap();
        prop_assert_eq!(&twice, &once);
        for doc in once.documents() {
            let ms = doc.mentions();
            for (i, a) in ms.iter().enumerate() {
                for b in &ms[i + 1..] {
                    prop_assert!(
                        a.span() == b.span() || !a.span().overlaps(b.span()),
                        "overlapping survivors {:?} and {:?}",
                        a.key(),
                        b.key()
                    );
                }
            }
        }
    }

    #[test]
    fn flatten_removes_exactly_the_strictly_contained(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        for (orig, out) in corpus.documents().iter().zip(flat.documents()) {
            let expected: BTreeSet<(usize, usize, String)> = orig
                .mentions()
                .iter()
                .filter(|m| {
                    !orig.mentions().iter().any(|o| o.span().strictly_contains(m.span()))
                })
                .map(|m| m.to_triple())
                .collect();
            prop_assert_eq!(keyset(out), expected);
        }
    }

    #[test]
    fn stats_counts_are_consistent(corpus in arb_corpus()) {
        let stats = corpus_stats(&corpus);
        prop_assert_eq!(stats.inner + stats.outer, stats.total);
        let per_type_total: usize = stats.per_type.values().map(|c| c.total).sum();
        prop_assert_eq!(per_type_total, stats.total);
        let depth_total: usize = stats.depth_histogram.values().sum();
        prop_assert_eq!(depth_total, stats.total);
        prop_assert_eq!(stats.outer, flatten(&corpus).unwrap().mention_count());
    }

    #[test]
    fn brat_round_trip_preserves_mention_multiset(corpus in arb_corpus()) {
        for doc in corpus.documents() {
            let (ann, txt) = write_brat(doc);
            let back = parse_brat(&ann, &txt).unwrap().with_doc_id(doc.doc_id());
            prop_assert_eq!(keyset(&back), keyset(doc));
            prop_assert_eq!(back.text(), doc.text());
        }
    }

    #[test]
    fn inclusions_lie_strictly_inside_flat_mentions(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        let dict = LemmaDictionary::empty();
        let index = build_surface_index(&flat, &dict);
        let exact = extract_inclusions(&flat, &index, MatchMode::Exact, &dict).unwrap();
        for (fdoc, adoc) in flat.documents().iter().zip(exact.corpus.documents()) {
            let original = keyset(fdoc);
            // never modifies or removes existing mentions
            for key in &original {
                prop_assert!(keyset(adoc).contains(key));
            }
            for m in adoc.mentions() {
                if original.contains(&m.to_triple()) {
                    continue;
                }
                prop_assert!(
                    fdoc.mentions().iter().any(|f| f.span().strictly_contains(m.span())),
                    "inclusion {:?} not strictly inside any flat mention",
                    m.key()
                );
                prop_assert!(index.contains_exact(m.surface()));
            }
        }
    }

    #[test]
    fn exact_spans_subset_of_lemmatized_with_empty_dict(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        let dict = LemmaDictionary::empty();
        let index = build_surface_index(&flat, &dict);
        let exact = extract_inclusions(&flat, &index, MatchMode::Exact, &dict).unwrap();
        let lemma = extract_inclusions(&flat, &index, MatchMode::Lemmatized, &dict).unwrap();
        for ((fdoc, edoc), ldoc) in flat
            .documents()
            .iter()
            .zip(exact.corpus.documents())
            .zip(lemma.corpus.documents())
        {
            let original = keyset(fdoc);
            let exact_spans: BTreeSet<(usize, usize)> = edoc
                .mentions()
                .iter()
                .filter(|m| !original.contains(&m.to_triple()))
                .map(|m| (m.start(), m.end()))
                .collect();
            let lemma_spans: BTreeSet<(usize, usize)> = ldoc
                .mentions()
                .iter()
                .filter(|m| !original.contains(&m.to_triple()))
                .map(|m| (m.start(), m.end()))
                .collect();
            prop_assert!(exact_spans.is_subset(&lemma_spans));
        }
    }

    #[test]
    fn self_score_has_perfect_precision(corpus in arb_corpus()) {
        let score = score_inclusions(&corpus, &corpus).unwrap();
        if score.candidates > 0 {
            prop_assert_eq!(score.precision, 1.0);
            prop_assert_eq!(score.type_accuracy, 1.0);
        }
    }

    #[test]
    fn corruption_changes_only_edit_regions(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        let config = CorruptionConfig::new(SymbolKind::Letters, Position::End, DamageStrategy::Early, 11);
        for doc in flat.documents() {
            let record = corrupt_document(doc, &config).unwrap();
            let orig: Vec<char> = doc.text().chars().collect();
            let corr: Vec<char> = record.corrupted_text.chars().collect();
            let expected_delta: isize = record
                .edits
                .iter()
                .map(|e| {
                    e.replacement.chars().count() as isize
                        - (e.orig_end as isize - e.orig_start as isize)
                })
                .sum();
            prop_assert_eq!(corr.len() as isize - orig.len() as isize, expected_delta);
            let map = record.offset_map();
            // characters outside edits survive at their mapped positions
            for (pos, ch) in orig.iter().enumerate() {
                let inside = record
                    .edits
                    .iter()
                    .any(|e| pos >= e.orig_start && pos < e.orig_end);
                if !inside {
                    let mapped = map.to_corrupted(pos).unwrap();
                    prop_assert_eq!(corr[mapped], *ch);
                }
            }
        }
    }

    #[test]
    fn partition_covers_candidates_exactly(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        let dict = LemmaDictionary::empty();
        let index = build_surface_index(&flat, &dict);
        for doc in flat.documents() {
            let candidates = enumerate_spans(doc, 30);
            let part = partition_spans(
                doc,
                &candidates,
                &index,
                PartitionMode::ContentAware,
                MatchKind::ExactSurface,
                &dict,
            )
            .unwrap();
            // every candidate appears; the only duplicate keys are
            // equal-span positives with two types
            let mut by_key: BTreeSet<(usize, usize)> = BTreeSet::new();
            for c in &candidates {
                by_key.insert((c.start, c.end));
            }
            let mut labeled: BTreeSet<(usize, usize)> = BTreeSet::new();
            for l in &part.labels {
                labeled.insert((l.start, l.end));
            }
            prop_assert_eq!(&labeled, &by_key);
            for key in &by_key {
                let at: Vec<_> = part
                    .labels
                    .iter()
                    .filter(|l| (l.start, l.end) == *key)
                    .collect();
                if at.len() > 1 {
                    prop_assert!(at.iter().all(|l| l.label == LabelKind::Positive));
                }
            }
            // content-aware neutrals always carry an index key
            for l in &part.labels {
                if l.label == LabelKind::Neutral {
                    let reason = l.neutral_reason.as_deref().unwrap();
                    prop_assert!(index.contains_exact(reason));
                }
            }
            // every flat mention is either a positive or explicitly reported
            for m in doc.mentions() {
                let positive = part.labels.iter().any(|l| {
                    l.start == m.start()
                        && l.end == m.end()
                        && l.label == LabelKind::Positive
                        && l.pos_type.as_deref() == Some(m.entity_type())
                });
                let reported = part.unrepresented.iter().any(|u| u == m);
                prop_assert!(positive ^ reported, "mention {:?} neither positive nor reported", m.key());
            }
        }
    }

    #[test]
    fn geometric_neutrals_superset_of_content_aware(corpus in arb_corpus()) {
        let flat = flatten(&corpus).unwrap();
        let dict = LemmaDictionary::empty();
        let index = build_surface_index(&flat, &dict);
        for doc in flat.documents() {
            let candidates = enumerate_spans(doc, 30);
            let neutrals = |mode| {
                let part = partition_spans(doc, &candidates, &index, mode, MatchKind::ExactSurface, &dict)
                    .unwrap();
                part.labels
                    .into_iter()
                    .filter(|l| l.label == LabelKind::Neutral)
                    .map(|l| (l.start, l.end))
                    .collect::<BTreeSet<_>>()
            };
            prop_assert!(neutrals(PartitionMode::ContentAware).is_subset(&neutrals(PartitionMode::Geometric)));
        }
    }

    #[test]
    fn self_evaluation_is_perfect(corpus in arb_corpus()) {
        let report = evaluate(&corpus, &corpus, ContainmentRule::Literal).unwrap();
        for cat in [report.overall, report.inner, report.outer] {
            prop_assert_eq!(cat.micro.f1, 1.0);
            prop_assert_eq!(cat.macro_f1, 1.0);
        }
    }

    #[test]
    fn classification_is_a_partition_and_container_monotone(corpus in arb_corpus()) {
        for doc in corpus.documents() {
            let (inner, outer) = classify_inner_outer(doc.mentions(), ContainmentRule::Literal);
            prop_assert_eq!(inner.len() + outer.len(), doc.mentions().len());
            let inner_keys: BTreeSet<_> = inner.iter().map(Mention::key).collect();
            for m in &outer {
                prop_assert!(!inner_keys.contains(&m.key()));
            }
        }
    }
}
