//! Round-trip property for the JSONL corpus format over generated corpora.

use proptest::prelude::*;
use std::path::Path;

use nestweak::format::jsonl::{corpus_from_jsonl, corpus_to_jsonl};
use nestweak_core::{Corpus, Document, Span};

const WORDS: [&str; 6] = ["alpha", "beta", "gamma", "delta", "ru", "omega"];
const TYPES: [&str; 3] = ["ORG", "LOC", "PER"];

fn arb_doc(id: usize) -> impl Strategy<Value = Document> {
    (
        proptest::collection::vec(0usize..WORDS.len(), 2..15),
        proptest::collection::vec((0usize..15, 0usize..4, 0usize..TYPES.len()), 0..8),
        any::<bool>(),
    )
        .prop_map(move |(words, raw, with_layers)| {
            let tokens: Vec<&str> = words.iter().map(|&w| WORDS[w]).collect();
            let text = tokens.join(" ");
            let mut offsets = Vec::new();
            let mut pos = 0usize;
            for t in &tokens {
                offsets.push(Span::new(pos, pos + t.chars().count()));
                pos += t.chars().count() + 1;
            }
            let mut mentions = Vec::new();
            for (start, len, ty) in raw {
                let a = start % tokens.len();
                let b = (a + 1 + len).min(tokens.len());
                mentions.push((offsets[a].start, offsets[b - 1].end, TYPES[ty].to_string()));
            }
            let mut doc = Document::new(format!("doc{id:03}"), text, mentions).unwrap();
            if with_layers {
                doc = doc.with_tokens(offsets.clone()).unwrap();
                let end = offsets.last().unwrap().end;
                doc = doc.with_sentences(vec![Span::new(0, end)]).unwrap();
            }
            doc
        })
}

fn arb_corpus() -> impl Strategy<Value = Corpus> {
    proptest::collection::vec(0u8..1, 1..4).prop_flat_map(|docs| {
        let strategies: Vec<_> = (0..docs.len()).map(arb_doc).collect();
        strategies.prop_map(|docs| Corpus::from_documents("gen", docs).unwrap())
    })
}

proptest! {
    #[test]
    fn jsonl_round_trip_preserves_corpora(corpus in arb_corpus()) {
        let text = corpus_to_jsonl(&corpus, None);
        let back = corpus_from_jsonl(&text, Path::new("gen.jsonl")).unwrap();
        prop_assert_eq!(back, corpus);
    }
}
