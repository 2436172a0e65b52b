//! The pure and hybrid pipeline drivers: build one request per unit, execute
//! with bounded parallelism and retries, parse, and assemble prediction
//! corpora. A failed unit yields zero predictions and is recorded in the run
//! report; the pipeline never aborts mid-corpus.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use nestweak_core::lemma::LemmaDictionary;
use nestweak_core::llm::{
    build_hybrid_prompt, build_prompt, parse_hybrid_response, parse_response, ChatRequest,
    ChatResponse, Discard, GenParams, Occurrence, PromptSpec,
};
use nestweak_core::{Corpus, Document};

use super::transcript::{RecordingEndpoint, TranscriptWriter};
use super::ChatEndpoint;
use crate::error::ToolError;

/// One request per sentence or per document.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Granularity {
    Sentence,
    Document,
}

pub struct RunOptions {
    pub granularity: Granularity,
    pub occurrence: Occurrence,
    /// Total attempts per request (first try included).
    pub attempts: u32,
    pub backoff: Duration,
    pub jobs: usize,
    /// Canonical-form fallback for hybrid surface matching.
    pub lemma: Option<LemmaDictionary>,
}

impl Default for RunOptions {
    fn default() -> RunOptions {
        RunOptions {
            granularity: Granularity::Sentence,
            occurrence: Occurrence::First,
            attempts: 3,
            backoff: Duration::from_millis(250),
            jobs: 1,
            lemma: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunReport {
    pub requests: usize,
    /// (unit label, error) for units that failed after all attempts.
    pub failures: Vec<(String, String)>,
    pub parse_failures: usize,
    pub discarded_surfaces: usize,
    /// Hybrid answers equal to the whole outer span (not nested).
    pub dropped_self_spans: usize,
}

fn count_discards(report: &mut RunReport, discards: &[Discard]) {
    for d in discards {
        match d {
            Discard::ParseFailure { .. } => report.parse_failures += 1,
            Discard::NonStringValue { .. } | Discard::SurfaceNotFound { .. } => {
                report.discarded_surfaces += 1
            }
        }
    }
}

/// Run every request through the endpoint with retries, keeping result
/// order. Worker threads pull indices from a shared cursor.
fn execute(
    requests: &[ChatRequest],
    endpoint: &dyn ChatEndpoint,
    opts: &RunOptions,
) -> Vec<Result<ChatResponse, String>> {
    let n = requests.len();
    let results: Mutex<Vec<Option<Result<ChatResponse, String>>>> = Mutex::new(vec![None; n]);
    let cursor = AtomicUsize::new(0);
    let jobs = opts.jobs.max(1).min(n.max(1));

    let attempt = |request: &ChatRequest| -> Result<ChatResponse, String> {
        let mut last = String::new();
        for try_no in 0..opts.attempts.max(1) {
            match endpoint.complete(request) {
                Ok(response) => return Ok(response),
                Err(e) => {
                    last = e.to_string();
                    if try_no + 1 < opts.attempts {
                        thread::sleep(opts.backoff * 2u32.saturating_pow(try_no));
                    }
                }
            }
        }
        Err(last)
    };

    thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = cursor.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let outcome = attempt(&requests[i]);
                results.lock().expect("results lock")[i] = Some(outcome);
            });
        }
    });

    results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every unit executed"))
        .collect()
}

fn with_recorder<'a>(
    endpoint: &'a dyn ChatEndpoint,
    recorder: Option<&'a TranscriptWriter>,
) -> Box<dyn ChatEndpoint + 'a> {
    match recorder {
        Some(writer) => Box::new(RecordingEndpoint::new(endpoint, writer)),
        None => Box::new(Passthrough(endpoint)),
    }
}

struct Passthrough<'a>(&'a dyn ChatEndpoint);

impl ChatEndpoint for Passthrough<'_> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, super::EndpointError> {
        self.0.complete(request)
    }
}

struct PureUnit {
    doc_index: usize,
    label: String,
    offset: usize,
    text: String,
}

/// Pure extraction: one request per unit of the test corpus, predictions
/// parsed and assembled into a corpus over the original documents.
pub fn run_pure(
    test: &Corpus,
    spec: &PromptSpec,
    examples: &str,
    params: &GenParams,
    endpoint: &dyn ChatEndpoint,
    recorder: Option<&TranscriptWriter>,
    opts: &RunOptions,
) -> Result<(Corpus, RunReport), ToolError> {
    let mut units = Vec::new();
    for (doc_index, doc) in test.documents().iter().enumerate() {
        let map = doc.char_map();
        match opts.granularity {
            Granularity::Document => units.push(PureUnit {
                doc_index,
                label: doc.doc_id().to_string(),
                offset: 0,
                text: doc.text().to_string(),
            }),
            Granularity::Sentence => {
                for (i, sent) in doc.sentences_or_heuristic().iter().enumerate() {
                    if let Some(text) = map.slice(*sent) {
                        units.push(PureUnit {
                            doc_index,
                            label: format!("{}#s{}", doc.doc_id(), i),
                            offset: sent.start,
                            text: text.to_string(),
                        });
                    }
                }
            }
        }
    }

    let requests: Vec<ChatRequest> = units
        .iter()
        .map(|u| {
            Ok(ChatRequest {
                params: params.clone(),
                messages: build_prompt(&u.text, spec, examples)?,
            })
        })
        .collect::<Result<_, ToolError>>()?;

    let endpoint = with_recorder(endpoint, recorder);
    let outcomes = execute(&requests, endpoint.as_ref(), opts);

    let mut report = RunReport {
        requests: requests.len(),
        ..RunReport::default()
    };
    let mut per_doc: BTreeMap<usize, BTreeSet<(usize, usize, String)>> = BTreeMap::new();
    for (unit, outcome) in units.iter().zip(outcomes) {
        match outcome {
            Ok(response) => {
                let parsed = parse_response(&response.text, &unit.text, opts.occurrence);
                count_discards(&mut report, &parsed.discards);
                let slot = per_doc.entry(unit.doc_index).or_default();
                for e in parsed.entities {
                    slot.insert((
                        unit.offset + e.start,
                        unit.offset + e.end,
                        e.entity_type,
                    ));
                }
            }
            Err(error) => report.failures.push((unit.label.clone(), error)),
        }
    }

    let mut docs = Vec::with_capacity(test.documents().len());
    for (doc_index, doc) in test.documents().iter().enumerate() {
        let triples: Vec<(usize, usize, String)> = per_doc
            .remove(&doc_index)
            .map(|set| set.into_iter().collect())
            .unwrap_or_default();
        docs.push(Document::new(doc.doc_id(), doc.text(), triples)?);
    }
    let corpus = Corpus::from_documents(format!("{}.predictions", test.split_name()), docs)?;
    Ok((corpus, report))
}

/// Hybrid second stage: one request per outer mention; nested answers are
/// resolved within the outer span, shifted to document coordinates, and
/// merged with the outer predictions. Answers covering the entire span are
/// dropped (an equal-span prediction is not nested).
pub fn run_hybrid(
    outer_preds: &Corpus,
    spec: &PromptSpec,
    params: &GenParams,
    endpoint: &dyn ChatEndpoint,
    recorder: Option<&TranscriptWriter>,
    opts: &RunOptions,
) -> Result<(Corpus, RunReport), ToolError> {
    struct HybridUnit {
        doc_index: usize,
        mention_index: usize,
        label: String,
    }

    let mut units = Vec::new();
    let mut requests = Vec::new();
    for (doc_index, doc) in outer_preds.documents().iter().enumerate() {
        for (mention_index, m) in doc.mentions().iter().enumerate() {
            units.push(HybridUnit {
                doc_index,
                mention_index,
                label: format!("{}#{}-{}", doc.doc_id(), m.start(), m.end()),
            });
            requests.push(ChatRequest {
                params: params.clone(),
                messages: build_hybrid_prompt(m.surface(), m.entity_type(), spec)?,
            });
        }
    }

    let endpoint = with_recorder(endpoint, recorder);
    let outcomes = execute(&requests, endpoint.as_ref(), opts);

    let mut report = RunReport {
        requests: requests.len(),
        ..RunReport::default()
    };
    let mut per_doc: BTreeMap<usize, BTreeSet<(usize, usize, String)>> = BTreeMap::new();
    for (unit, outcome) in units.iter().zip(outcomes) {
        let doc = &outer_preds.documents()[unit.doc_index];
        let mention = &doc.mentions()[unit.mention_index];
        match outcome {
            Ok(response) => {
                let parsed = parse_hybrid_response(
                    &response.text,
                    mention,
                    opts.occurrence,
                    opts.lemma.as_ref(),
                );
                count_discards(&mut report, &parsed.discards);
                let slot = per_doc.entry(unit.doc_index).or_default();
                for e in parsed.entities {
                    let start = mention.start() + e.start;
                    let end = mention.start() + e.end;
                    if (start, end) == (mention.start(), mention.end()) {
                        report.dropped_self_spans += 1;
                        continue;
                    }
                    slot.insert((start, end, e.entity_type));
                }
            }
            Err(error) => report.failures.push((unit.label.clone(), error)),
        }
    }

    let mut docs = Vec::with_capacity(outer_preds.documents().len());
    for (doc_index, doc) in outer_preds.documents().iter().enumerate() {
        let mut triples: Vec<(usize, usize, String)> =
            doc.mentions().iter().map(|m| m.to_triple()).collect();
        if let Some(inner) = per_doc.remove(&doc_index) {
            triples.extend(inner);
        }
        docs.push(Document::new(doc.doc_id(), doc.text(), triples)?);
    }
    let corpus = Corpus::from_documents(format!("{}.hybrid", outer_preds.split_name()), docs)?;
    Ok((corpus, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::llm::MockEndpoint;
    use nestweak_core::llm::SelectionStrategy;

    fn spec() -> PromptSpec {
        PromptSpec::new("Extract entities.", 0, SelectionStrategy::Random, 1).unwrap()
    }

    fn test_corpus() -> Corpus {
        let d1 = Document::new(
            "a",
            "Russia won. China lost.",
            Vec::new(),
        )
        .unwrap();
        Corpus::from_documents("test", vec![d1]).unwrap()
    }

    #[test]
    fn pure_run_collects_per_sentence_predictions() {
        let mock = MockEndpoint::new(
            vec![
                ("Text: Russia won.".to_string(), "```{\"Russia\": \"COUNTRY\"}```".to_string()),
                ("Text: China lost.".to_string(), "```{\"China\": \"COUNTRY\"}```".to_string()),
            ],
            Some("```{}```".to_string()),
        );
        let (preds, report) = run_pure(
            &test_corpus(),
            &spec(),
            "",
            &GenParams::default(),
            &mock,
            None,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(report.requests, 2);
        assert!(report.failures.is_empty());
        let keys: Vec<(usize, usize, &str)> = preds.documents()[0]
            .mentions()
            .iter()
            .map(|m| m.key())
            .collect();
        // "China" starts at char 12 in the document.
        assert_eq!(keys, vec![(0, 6, "COUNTRY"), (12, 17, "COUNTRY")]);
    }

    #[test]
    fn failed_unit_yields_no_predictions_but_run_continues() {
        // Only the first sentence has a fixture; no default.
        let mock = MockEndpoint::new(
            vec![("Russia".to_string(), "```{\"Russia\": \"COUNTRY\"}```".to_string())],
            None,
        );
        let mut opts = RunOptions::default();
        opts.attempts = 1;
        opts.backoff = Duration::from_millis(0);
        let (preds, report) = run_pure(
            &test_corpus(),
            &spec(),
            "",
            &GenParams::default(),
            &mock,
            None,
            &opts,
        )
        .unwrap();
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].0, "a#s1");
        assert_eq!(preds.documents()[0].mentions().len(), 1);
    }

    #[test]
    fn parallel_execution_matches_sequential() {
        let mock = MockEndpoint::new(
            vec![
                ("Russia".to_string(), "```{\"Russia\": \"COUNTRY\"}```".to_string()),
                ("China".to_string(), "```{\"China\": \"COUNTRY\"}```".to_string()),
            ],
            Some("```{}```".to_string()),
        );
        let run = |jobs| {
            let mut opts = RunOptions::default();
            opts.jobs = jobs;
            run_pure(
                &test_corpus(),
                &spec(),
                "",
                &GenParams::default(),
                &mock,
                None,
                &opts,
            )
            .unwrap()
            .0
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn hybrid_merges_inner_and_drops_self() {
        let text = "Min. of Foreign Affairs of Russia met";
        let outer = Corpus::from_documents(
            "preds",
            vec![Document::new(
                "a",
                text,
                vec![(0, 33, "ORGANIZATION".to_string())],
            )
            .unwrap()],
        )
        .unwrap();
        // Answer contains the inner COUNTRY and the outer surface itself.
        let mock = MockEndpoint::new(
            vec![],
            Some(
                "```{\"Russia\": \"COUNTRY\", \"Min. of Foreign Affairs of Russia\": \"ORGANIZATION\"}```"
                    .to_string(),
            ),
        );
        let (merged, report) = run_hybrid(
            &outer,
            &spec(),
            &GenParams::default(),
            &mock,
            None,
            &RunOptions::default(),
        )
        .unwrap();
        assert_eq!(report.dropped_self_spans, 1);
        let keys: Vec<(usize, usize, &str)> = merged.documents()[0]
            .mentions()
            .iter()
            .map(|m| m.key())
            .collect();
        assert_eq!(keys, vec![(0, 33, "ORGANIZATION"), (27, 33, "COUNTRY")]);
    }

    #[test]
    fn hybrid_is_a_superset_of_outer() {
        let outer = Corpus::from_documents(
            "preds",
            vec![Document::new(
                "a",
                "Foreign Affairs Office",
                vec![(0, 22, "ORGANIZATION".to_string())],
            )
            .unwrap()],
        )
        .unwrap();
        let mock = MockEndpoint::new(vec![], Some("```{}```".to_string()));
        let (merged, _) = run_hybrid(
            &outer,
            &spec(),
            &GenParams::default(),
            &mock,
            None,
            &RunOptions::default(),
        )
        .unwrap();
        for m in outer.documents()[0].mentions() {
            assert!(merged.documents()[0]
                .mentions()
                .iter()
                .any(|x| x.key() == m.key()));
        }
    }
}
