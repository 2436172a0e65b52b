//! Containment-based evaluation: entities are classified inner or outer
//! independently on the gold and predicted sides, and micro/macro precision,
//! recall and F1 are reported for three categories (overall, inner, outer).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::types::{Corpus, Mention};

/// How "e_j fully contains e_i" treats span-equal pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContainmentRule {
    /// The containment inequalities applied literally with self-exclusion:
    /// two distinct entities with the same span contain each other, so both
    /// come out inner. Default.
    Literal,
    /// Strict containment only: a span-equal pair does not nest.
    Strict,
}

fn contains(outer: &Mention, inner: &Mention, rule: ContainmentRule) -> bool {
    let geo = outer.start() <= inner.start() && inner.end() <= outer.end();
    match rule {
        ContainmentRule::Literal => geo,
        ContainmentRule::Strict => geo && outer.span() != inner.span(),
    }
}

/// Split one document's entities (one side only) into inner and outer sets.
/// An entity is inner iff some *other* entity of the set contains it.
pub fn classify_inner_outer(
    entities: &[Mention],
    rule: ContainmentRule,
) -> (Vec<Mention>, Vec<Mention>) {
    let mut inner = Vec::new();
    let mut outer = Vec::new();
    for (i, e) in entities.iter().enumerate() {
        let is_inner = entities
            .iter()
            .enumerate()
            .any(|(j, o)| j != i && contains(o, e, rule));
        if is_inner {
            inner.push(e.clone());
        } else {
            outer.push(e.clone());
        }
    }
    (inner, outer)
}

/// Micro counts and derived ratios for one category.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct MicroScores {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl MicroScores {
    fn finish(mut self) -> MicroScores {
        if self.tp + self.fp + self.fn_ == 0 {
            // Nothing gold and nothing predicted: vacuously perfect.
            self.precision = 1.0;
            self.recall = 1.0;
            self.f1 = 1.0;
            return self;
        }
        self.precision = if self.tp + self.fp > 0 {
            self.tp as f64 / (self.tp + self.fp) as f64
        } else {
            0.0
        };
        self.recall = if self.tp + self.fn_ > 0 {
            self.tp as f64 / (self.tp + self.fn_) as f64
        } else {
            0.0
        };
        self.f1 = if self.precision + self.recall > 0.0 {
            2.0 * self.precision * self.recall / (self.precision + self.recall)
        } else {
            0.0
        };
        self
    }
}

/// Scores for one category: micro over the aggregated counts plus the
/// per-document F1 mean.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CategoryScores {
    pub micro: MicroScores,
    pub macro_f1: f64,
}

/// Full evaluation report.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalReport {
    pub overall: CategoryScores,
    pub inner: CategoryScores,
    pub outer: CategoryScores,
    /// Micro scores per entity type (overall category).
    pub per_type: BTreeMap<String, MicroScores>,
    pub documents: usize,
}

fn keys(ms: &[Mention]) -> BTreeSet<(usize, usize, String)> {
    ms.iter().map(|m| m.to_triple()).collect()
}

struct CategoryAccum {
    tp: usize,
    fp: usize,
    fn_: usize,
    doc_f1_sum: f64,
}

impl CategoryAccum {
    fn new() -> CategoryAccum {
        CategoryAccum {
            tp: 0,
            fp: 0,
            fn_: 0,
            doc_f1_sum: 0.0,
        }
    }

    fn add_doc(&mut self, gold: &BTreeSet<(usize, usize, String)>, pred: &BTreeSet<(usize, usize, String)>) {
        let tp = gold.intersection(pred).count();
        let fp = pred.len() - tp;
        let fn_ = gold.len() - tp;
        self.tp += tp;
        self.fp += fp;
        self.fn_ += fn_;
        // Per-document F1 with the same conventions: empty/empty counts as
        // perfect, gold without predictions as zero.
        self.doc_f1_sum += if tp + fp + fn_ == 0 {
            1.0
        } else {
            2.0 * tp as f64 / (2.0 * tp as f64 + fp as f64 + fn_ as f64)
        };
    }

    fn finish(&self, documents: usize) -> CategoryScores {
        CategoryScores {
            micro: MicroScores {
                tp: self.tp,
                fp: self.fp,
                fn_: self.fn_,
                ..MicroScores::default()
            }
            .finish(),
            macro_f1: if documents == 0 {
                1.0
            } else {
                self.doc_f1_sum / documents as f64
            },
        }
    }
}

/// Score predictions against gold. Matching is exact `(start, end, type)`
/// equality; the inner/outer split is computed independently per side.
pub fn evaluate(gold: &Corpus, pred: &Corpus, rule: ContainmentRule) -> Result<EvalReport, CoreError> {
    let gold_ids: Vec<&str> = gold.documents().iter().map(|d| d.doc_id()).collect();
    let pred_ids: Vec<&str> = pred.documents().iter().map(|d| d.doc_id()).collect();
    if gold_ids != pred_ids {
        return Err(CoreError::DocMismatch(alloc::format!(
            "gold has {} documents, predictions have {}",
            gold_ids.len(),
            pred_ids.len()
        )));
    }

    let mut overall = CategoryAccum::new();
    let mut inner = CategoryAccum::new();
    let mut outer = CategoryAccum::new();
    let mut type_counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    let mut all_types: BTreeSet<String> = BTreeSet::new();

    for (gdoc, pdoc) in gold.documents().iter().zip(pred.documents()) {
        let (g_inner, g_outer) = classify_inner_outer(gdoc.mentions(), rule);
        let (p_inner, p_outer) = classify_inner_outer(pdoc.mentions(), rule);
        let g_all = keys(gdoc.mentions());
        let p_all = keys(pdoc.mentions());
        overall.add_doc(&g_all, &p_all);
        inner.add_doc(&keys(&g_inner), &keys(&p_inner));
        outer.add_doc(&keys(&g_outer), &keys(&p_outer));

        for t in g_all.iter().chain(&p_all).map(|k| k.2.clone()) {
            all_types.insert(t);
        }
        for key in g_all.intersection(&p_all) {
            type_counts.entry(key.2.clone()).or_default().0 += 1;
        }
        for key in p_all.difference(&g_all) {
            type_counts.entry(key.2.clone()).or_default().1 += 1;
        }
        for key in g_all.difference(&p_all) {
            type_counts.entry(key.2.clone()).or_default().2 += 1;
        }
    }

    let documents = gold.documents().len();
    let per_type = all_types
        .into_iter()
        .map(|t| {
            let (tp, fp, fn_) = type_counts.get(&t).copied().unwrap_or_default();
            (
                t,
                MicroScores {
                    tp,
                    fp,
                    fn_,
                    ..MicroScores::default()
                }
                .finish(),
            )
        })
        .collect();

    Ok(EvalReport {
        overall: overall.finish(documents),
        inner: inner.finish(documents),
        outer: outer.finish(documents),
        per_type,
        documents,
    })
}
