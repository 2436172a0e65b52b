//! Human-readable tables and machine-readable JSON for evaluation reports,
//! inclusion scores, and corpus statistics. Both views carry the same
//! numbers under fixed key names.

use nestweak_core::evaluation::{CategoryScores, EvalReport, MicroScores};
use nestweak_core::inclusions::InclusionScore;
use nestweak_core::nesting::CorpusStats;
use serde_json::json;

use crate::provenance::Provenance;

/// Published totals for the NEREL train split, reported alongside the
/// toolkit's own counts (the two sources disagree on the exact figure).
pub const NEREL_TRAIN_EXACT_TOTALS_REPORTED: [u64; 2] = [6458, 6481];
pub const NEREL_TRAIN_LEMMATIZED_TOTAL_REPORTED: u64 = 120_420;

fn micro_json(m: &MicroScores) -> serde_json::Value {
    json!({
        "tp": m.tp,
        "fp": m.fp,
        "fn": m.fn_,
        "precision": m.precision,
        "recall": m.recall,
        "f1": m.f1,
    })
}

fn category_json(c: &CategoryScores) -> serde_json::Value {
    json!({
        "micro": micro_json(&c.micro),
        "macro_f1": c.macro_f1,
    })
}

pub fn eval_report_json(report: &EvalReport, provenance: Option<&Provenance>) -> serde_json::Value {
    let per_type: serde_json::Map<String, serde_json::Value> = report
        .per_type
        .iter()
        .map(|(t, m)| (t.clone(), micro_json(m)))
        .collect();
    let mut value = json!({
        "documents": report.documents,
        "overall": category_json(&report.overall),
        "inner": category_json(&report.inner),
        "outer": category_json(&report.outer),
        "per_type": per_type,
    });
    if let Some(p) = provenance {
        value["provenance"] = serde_json::to_value(p).expect("provenance serializes");
    }
    value
}

fn pct(x: f64) -> String {
    format!("{:6.2}", x * 100.0)
}

pub fn eval_report_text(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("documents: {}\n\n", report.documents));
    out.push_str("category  micro-P  micro-R  micro-F1  macro-F1      TP      FP      FN\n");
    for (name, c) in [
        ("overall", &report.overall),
        ("inner", &report.inner),
        ("outer", &report.outer),
    ] {
        out.push_str(&format!(
            "{name:<8}   {}   {}    {}    {}  {:>6}  {:>6}  {:>6}\n",
            pct(c.micro.precision),
            pct(c.micro.recall),
            pct(c.micro.f1),
            pct(c.macro_f1),
            c.micro.tp,
            c.micro.fp,
            c.micro.fn_,
        ));
    }
    if !report.per_type.is_empty() {
        out.push_str("\nper-type (micro):\n");
        out.push_str("type                      P        R       F1      TP/FP/FN\n");
        for (t, m) in &report.per_type {
            out.push_str(&format!(
                "{t:<22} {}   {}   {}   {}/{}/{}\n",
                pct(m.precision),
                pct(m.recall),
                pct(m.f1),
                m.tp,
                m.fp,
                m.fn_,
            ));
        }
    }
    out
}

/// Inclusion score report. `own_candidates` is the extractor's added-mention
/// count; the published reference totals are included without picking one as
/// authoritative, and the matching assumptions are spelled out.
pub fn inclusion_score_json(
    score: &InclusionScore,
    own_candidates: usize,
    mode: &str,
    provenance: Option<&Provenance>,
) -> serde_json::Value {
    let per_type: serde_json::Map<String, serde_json::Value> = score
        .per_type
        .iter()
        .map(|(t, row)| {
            (
                t.clone(),
                json!({
                    "true_inner": row.true_inner,
                    "candidates": row.candidates,
                    "span_and_type_matches": row.span_and_type_matches,
                    "precision": row.precision,
                }),
            )
        })
        .collect();
    let mut value = json!({
        "mode": mode,
        "candidates": score.candidates,
        "extracted": own_candidates,
        "span_matches": score.span_matches,
        "span_and_type_matches": score.span_and_type_matches,
        "gold_inner": score.gold_inner,
        "precision": score.precision,
        "recall": score.recall,
        "type_accuracy": score.type_accuracy,
        "per_type": per_type,
        "assumptions": [
            "matches are constrained to token boundaries of the outer mention",
            "ambiguous surface types resolve to the most frequent type, ties to the lexicographically smallest type name",
        ],
        "reference": {
            "nerel_train_exact_totals_reported": NEREL_TRAIN_EXACT_TOTALS_REPORTED,
            "nerel_train_lemmatized_total_reported": NEREL_TRAIN_LEMMATIZED_TOTAL_REPORTED,
        },
    });
    if let Some(p) = provenance {
        value["provenance"] = serde_json::to_value(p).expect("provenance serializes");
    }
    value
}

pub fn inclusion_score_text(score: &InclusionScore, own_candidates: usize, mode: &str) -> String {
    let mut out = String::new();
    out.push_str(&format!("mode: {mode}\n"));
    out.push_str(&format!("extracted inclusions: {own_candidates}\n"));
    out.push_str(&format!(
        "candidates scored: {}  span matches: {}  span+type matches: {}  gold inner: {}\n",
        score.candidates, score.span_matches, score.span_and_type_matches, score.gold_inner
    ));
    out.push_str(&format!(
        "precision: {}%  recall: {}%  type accuracy: {}%\n",
        pct(score.precision).trim(),
        pct(score.recall).trim(),
        pct(score.type_accuracy).trim()
    ));
    out.push_str(&format!(
        "reference totals reported elsewhere for NEREL train: exact {:?}, lemmatized {}\n",
        NEREL_TRAIN_EXACT_TOTALS_REPORTED, NEREL_TRAIN_LEMMATIZED_TOTAL_REPORTED
    ));
    out.push_str("\ntype                   true-inner  candidates  matches  precision%\n");
    for (t, row) in &score.per_type {
        out.push_str(&format!(
            "{t:<22} {:>10}  {:>10}  {:>7}  {}\n",
            row.true_inner,
            row.candidates,
            row.span_and_type_matches,
            pct(row.precision)
        ));
    }
    out
}

pub fn stats_json(stats: &CorpusStats, provenance: Option<&Provenance>) -> serde_json::Value {
    let per_type: serde_json::Map<String, serde_json::Value> = stats
        .per_type
        .iter()
        .map(|(t, c)| {
            (
                t.clone(),
                json!({"total": c.total, "inner": c.inner, "outer": c.outer}),
            )
        })
        .collect();
    let depth: serde_json::Map<String, serde_json::Value> = stats
        .depth_histogram
        .iter()
        .map(|(d, n)| (d.to_string(), json!(n)))
        .collect();
    let mut value = json!({
        "documents": stats.documents,
        "total": stats.total,
        "inner": stats.inner,
        "outer": stats.outer,
        "per_type": per_type,
        "depth_histogram": depth,
    });
    if let Some(p) = provenance {
        value["provenance"] = serde_json::to_value(p).expect("provenance serializes");
    }
    value
}

pub fn stats_text(stats: &CorpusStats) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "documents: {}  mentions: {}  inner: {}  outer: {}\n",
        stats.documents, stats.total, stats.inner, stats.outer
    ));
    out.push_str("\ndepth histogram:\n");
    for (depth, count) in &stats.depth_histogram {
        out.push_str(&format!("  depth {depth}: {count}\n"));
    }
    out.push_str("\ntype                      total   inner   outer\n");
    for (t, c) in &stats.per_type {
        out.push_str(&format!(
            "{t:<22} {:>8} {:>7} {:>7}\n",
            c.total, c.inner, c.outer
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use nestweak_core::evaluation::{evaluate, ContainmentRule};
    use nestweak_core::{Corpus, Document};

    #[test]
    fn eval_json_has_fixed_keys() {
        let doc = Document::new("d", "Russia", vec![(0, 6, "COUNTRY".to_string())]).unwrap();
        let corpus = Corpus::from_documents("s", vec![doc]).unwrap();
        let report = evaluate(&corpus, &corpus, ContainmentRule::Literal).unwrap();
        let value = eval_report_json(&report, None);
        assert_eq!(value["overall"]["micro"]["f1"], 1.0);
        assert_eq!(value["inner"]["macro_f1"], 1.0);
        assert_eq!(value["per_type"]["COUNTRY"]["tp"], 1);
        let text = eval_report_text(&report);
        assert!(text.contains("overall"));
        assert!(text.contains("100.00"));
    }
}
