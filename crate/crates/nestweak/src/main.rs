//! `nestweak` command-line interface.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use nestweak::assets;
use nestweak::config::FileConfig;
use nestweak::error::ToolError;
use nestweak::format::{brat_files, conllu, jsonl, labels, lemma_file, records};
use nestweak::llm::{
    run_hybrid, run_pure, ChatEndpoint, Granularity, HttpEndpoint, MockEndpoint, ReplayEndpoint,
    RunOptions, RunReport, TranscriptWriter,
};
use nestweak::provenance::Provenance;
use nestweak::report;

use nestweak_core::corruption::{
    build_pseudo_nested, emit_fold_datasets, remap_predictions, CorruptionConfig, Position,
    Strategy, SymbolKind,
};
use nestweak_core::evaluation::{evaluate, ContainmentRule};
use nestweak_core::inclusions::{build_surface_index, extract_inclusions, score_inclusions, MatchMode};
use nestweak_core::lemma::LemmaDictionary;
use nestweak_core::llm::{select_examples, GenParams, Occurrence, PromptSpec, SelectionStrategy};
use nestweak_core::nesting::{corpus_stats, flatten};
use nestweak_core::neutralization::{partition_corpus, with_inclusion_positives, MatchKind, PartitionMode};
use nestweak_core::Corpus;

/// Toolkit for learning nested entity structure from flat annotations:
/// format conversion, inclusion mining, entity corruption, span
/// neutralization, containment-based evaluation, and LLM extraction
/// pipelines.
#[derive(Parser)]
#[command(name = "nestweak", version, about, max_term_width = 100)]
struct Cli {
    /// Optional key=value configuration file (keys: seed, jobs, model,
    /// endpoint). Command-line flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for endpoint requests.
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Convert between standoff directories and the JSONL corpus format.
    Convert(ConvertArgs),
    /// Keep only the outermost mentions of every document.
    Flatten(FlattenArgs),
    /// Report total/inner/outer mention counts and the nesting-depth histogram.
    Stats(StatsArgs),
    /// Mine pseudo-nested mentions by surface matching and optionally score
    /// them against gold nested annotations.
    Inclusions(InclusionsArgs),
    /// Emit k-fold corrupted train/predict datasets.
    Corrupt(CorruptArgs),
    /// Translate predictions made over corrupted text back onto the
    /// original documents.
    Remap(RemapArgs),
    /// Merge remapped predictions into the flat corpus as pseudo-nested
    /// annotations.
    PseudoMerge(PseudoMergeArgs),
    /// Partition candidate spans into positive/negative/neutral and export
    /// the loss mask.
    Neutralize(NeutralizeArgs),
    /// Score predictions against gold with inner/outer micro/macro F1.
    Eval(EvalArgs),
    /// LLM extraction pipelines over a chat-completions endpoint.
    #[command(subcommand)]
    Llm(LlmCommand),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatKind {
    Brat,
    Jsonl,
}

#[derive(Args)]
struct ConvertArgs {
    #[arg(long, value_enum)]
    from: FormatKind,
    #[arg(long, value_enum)]
    to: FormatKind,
    /// Directory (brat) or file (jsonl).
    #[arg(long)]
    input: PathBuf,
    /// Directory (brat) or file (jsonl).
    #[arg(long)]
    output: PathBuf,
    /// Split name recorded in the corpus.
    #[arg(long, default_value = "corpus")]
    split: String,
}

#[derive(Args)]
struct FlattenArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    input: PathBuf,
    /// Write the machine-readable report here (text goes to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InclusionMode {
    Exact,
    Lemma,
}

#[derive(Args)]
struct InclusionsArgs {
    /// Flat corpus to mine.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    mode: InclusionMode,
    /// Lemma dictionary file (surface<TAB>lemma) for lemma mode.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Gold nested corpus to score the inclusions against.
    #[arg(long)]
    score_against: Option<PathBuf>,
    /// Augmented corpus output.
    #[arg(long)]
    output: PathBuf,
    /// Score report output (JSON); the text report goes to stdout.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymbolArg {
    Digits,
    Letters,
    Diglets,
    Semicolons,
    Commas,
}

#[derive(Clone, Copy, ValueEnum)]
enum PositionArg {
    Start,
    End,
    Middle,
    Random,
    Syntax,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Early,
    Late,
}

#[derive(Args)]
struct CorruptArgs {
    /// Flat corpus to corrupt.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    symbol: SymbolArg,
    #[arg(long, value_enum)]
    position: PositionArg,
    #[arg(long, value_enum)]
    strategy: StrategyArg,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Minimum token count for a mention to be corrupted.
    #[arg(long, default_value_t = 3)]
    min_words: usize,
    /// Replacement noise-token length in characters.
    #[arg(long, default_value_t = 3)]
    replacement_len: usize,
    /// CoNLL-U file supplying token/sentence/dependency layers (required
    /// for --position syntax).
    #[arg(long)]
    deps: Option<PathBuf>,
    /// Directory for fold{K}.train.jsonl / fold{K}.predict.jsonl /
    /// fold{K}.records.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RemapArgs {
    /// Predictions over corrupted text.
    #[arg(long)]
    preds: PathBuf,
    /// Corruption records emitted by `corrupt`.
    #[arg(long)]
    records: PathBuf,
    /// The original (uncorrupted) corpus.
    #[arg(long)]
    original: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct PseudoMergeArgs {
    /// Flat corpus.
    #[arg(long)]
    flat: PathBuf,
    /// Remapped predictions over original text.
    #[arg(long)]
    preds: PathBuf,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum NeutralizeModeArg {
    Content,
    Geometric,
}

#[derive(Clone, Copy, ValueEnum)]
enum MatchArg {
    Exact,
    Lemma,
}

#[derive(Args)]
struct NeutralizeArgs {
    /// Flat corpus; the surface index is built from it.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "content")]
    mode: NeutralizeModeArg,
    /// Surface matching used in content mode.
    #[arg(long, value_enum, default_value = "exact")]
    match_kind: MatchArg,
    /// Lemma dictionary for canonical matching.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Augmented corpus whose extra mentions flip neutral spans to positive.
    #[arg(long)]
    with_inclusions: Option<PathBuf>,
    /// Candidate span cap in tokens.
    #[arg(long, default_value_t = 30)]
    max_len: usize,
    /// Span-label file output.
    #[arg(long)]
    output: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum ContainmentArg {
    Literal,
    Strict,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    gold: PathBuf,
    #[arg(long)]
    pred: PathBuf,
    /// Equal-span pairs: literal containment (mutually inner) or strict.
    #[arg(long, value_enum, default_value = "literal")]
    containment: ContainmentArg,
    /// Write the machine-readable report here (text goes to stdout).
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum LlmCommand {
    /// One request per sentence (or document) of the input corpus.
    Pure(LlmPureArgs),
    /// One request per outer mention of the first-stage predictions.
    Hybrid(LlmHybridArgs),
}

#[derive(Args)]
struct LlmShared {
    /// OpenAI-compatible API root, e.g. http://localhost:8000/v1. The auth
    /// token is read from NESTWEAK_API_KEY (or OPENAI_API_KEY).
    #[arg(long)]
    endpoint: Option<String>,
    /// Mock fixtures file instead of a live endpoint.
    #[arg(long)]
    mock: Option<PathBuf>,
    /// Replay a recorded transcript instead of a live endpoint.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Record every request/response pair to this transcript.
    #[arg(long)]
    record: Option<PathBuf>,
    /// Model name sent with every request.
    #[arg(long)]
    model: Option<String>,
    /// Prompt template file (default: shipped asset).
    #[arg(long)]
    template: Option<PathBuf>,
    /// Per-type definitions file to append (use "default" for the shipped
    /// asset).
    #[arg(long)]
    definitions: Option<String>,
    /// Per-type nesting-pattern file (use "default" for the shipped asset).
    #[arg(long)]
    patterns: Option<String>,
    /// Resolve predicted strings to the first or to all occurrences.
    #[arg(long, value_enum, default_value = "first")]
    occurrence: OccurrenceArg,
    #[arg(long)]
    seed: Option<u64>,
    /// Predictions output (JSONL corpus).
    #[arg(long)]
    output: PathBuf,
    /// Write the run report (failures, discards) here as JSON.
    #[arg(long)]
    run_report: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OccurrenceArg {
    First,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum SelectArg {
    Random,
    Mfe,
    MfeEntwise,
    MfeEntwiseSent,
}

#[derive(Args)]
struct LlmPureArgs {
    /// Corpus to extract from.
    #[arg(long)]
    input: PathBuf,
    /// Training corpus for few-shot example selection.
    #[arg(long)]
    train: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    shots: u8,
    #[arg(long, value_enum, default_value = "random")]
    select: SelectArg,
    /// Lemma dictionary for mfe-entwise-sent pooling.
    #[arg(long)]
    dict: Option<PathBuf>,
    /// One request per document instead of per sentence.
    #[arg(long)]
    per_document: bool,
    #[command(flatten)]
    shared: LlmShared,
}

#[derive(Args)]
struct LlmHybridArgs {
    /// First-stage outer predictions (JSONL corpus over original text).
    #[arg(long)]
    outer: PathBuf,
    /// Lemma dictionary enabling canonical-form fallback matching.
    #[arg(long)]
    lemma_matching: Option<PathBuf>,
    #[command(flatten)]
    shared: LlmShared,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("nestweak: error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn command_line() -> String {
    let args: Vec<String> = std::env::args().collect();
    args.join(" ")
}

fn provenance_for(seed: Option<u64>, inputs: &[&Path]) -> Result<Provenance, ToolError> {
    let mut p = Provenance::new(command_line(), seed);
    for path in inputs {
        p.add_input(path)?;
    }
    Ok(p)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), ToolError> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| ToolError::io(path, e))
}

fn load_dict(path: Option<&PathBuf>) -> Result<LemmaDictionary, ToolError> {
    match path {
        Some(p) => lemma_file::read_lemma_dictionary(p),
        None => Ok(LemmaDictionary::empty()),
    }
}

fn run(cli: Cli) -> Result<(), ToolError> {
    let config = FileConfig::load(cli.config.as_deref())?;
    let jobs = config.resolve(cli.jobs, "jobs", 1usize)?;

    match cli.command {
        Command::Convert(args) => {
            let corpus = match args.from {
                FormatKind::Brat => brat_files::read_brat_dir(&args.input, &args.split)?,
                FormatKind::Jsonl => jsonl::read_corpus(&args.input)?,
            };
            match args.to {
                FormatKind::Brat => brat_files::write_brat_dir(&args.output, &corpus)?,
                FormatKind::Jsonl => {
                    let prov = if args.input.is_file() {
                        provenance_for(None, &[&args.input])?
                    } else {
                        provenance_for(None, &[])?
                    };
                    jsonl::write_corpus(&args.output, &corpus, Some(&prov))?;
                }
            }
            eprintln!(
                "converted {} documents, {} mentions",
                corpus.documents().len(),
                corpus.mention_count()
            );
            Ok(())
        }
        Command::Flatten(args) => {
            let corpus = jsonl::read_corpus(&args.input)?;
            let flat = flatten(&corpus)?;
            let prov = provenance_for(None, &[&args.input])?;
            jsonl::write_corpus(&args.output, &flat, Some(&prov))?;
            eprintln!(
                "flattened: {} -> {} mentions",
                corpus.mention_count(),
                flat.mention_count()
            );
            Ok(())
        }
        Command::Stats(args) => {
            let corpus = jsonl::read_corpus(&args.input)?;
            let stats = corpus_stats(&corpus);
            print!("{}", report::stats_text(&stats));
            if let Some(out) = args.output {
                let prov = provenance_for(None, &[&args.input])?;
                write_json(&out, &report::stats_json(&stats, Some(&prov)))?;
            }
            Ok(())
        }
        Command::Inclusions(args) => {
            let corpus = jsonl::read_corpus(&args.input)?;
            let dict = load_dict(args.dict.as_ref())?;
            let mode = match args.mode {
                InclusionMode::Exact => MatchMode::Exact,
                InclusionMode::Lemma => MatchMode::Lemmatized,
            };
            let index = build_surface_index(&corpus, &dict);
            let extraction = extract_inclusions(&corpus, &index, mode, &dict)?;
            let mode_name = match mode {
                MatchMode::Exact => "exact",
                MatchMode::Lemmatized => "lemmatized",
            };
            let prov = provenance_for(None, &[&args.input])?;
            jsonl::write_corpus(&args.output, &extraction.corpus, Some(&prov))?;
            eprintln!("extracted {} inclusions ({mode_name})", extraction.added_total);

            if let Some(gold_path) = args.score_against {
                let gold = jsonl::read_corpus(&gold_path)?;
                let score = score_inclusions(&extraction.corpus, &gold)?;
                print!(
                    "{}",
                    report::inclusion_score_text(&score, extraction.added_total, mode_name)
                );
                if let Some(report_path) = args.report {
                    let prov = provenance_for(None, &[&args.input, &gold_path])?;
                    write_json(
                        &report_path,
                        &report::inclusion_score_json(
                            &score,
                            extraction.added_total,
                            mode_name,
                            Some(&prov),
                        ),
                    )?;
                }
            }
            Ok(())
        }
        Command::Corrupt(args) => {
            let mut corpus = jsonl::read_corpus(&args.input)?;
            if let Some(deps) = &args.deps {
                let layers = conllu::read_conllu(deps)?;
                corpus = conllu::attach_layers(&corpus, &layers)?;
            }
            let seed = config.resolve(args.seed, "seed", 0u64)?;
            let folds = config.resolve(args.folds, "folds", 5usize)?;
            let cfg = CorruptionConfig {
                symbol: match args.symbol {
                    SymbolArg::Digits => SymbolKind::Digits,
                    SymbolArg::Letters => SymbolKind::Letters,
                    SymbolArg::Diglets => SymbolKind::Diglets,
                    SymbolArg::Semicolons => SymbolKind::Semicolons,
                    SymbolArg::Commas => SymbolKind::Commas,
                },
                position: match args.position {
                    PositionArg::Start => Position::Start,
                    PositionArg::End => Position::End,
                    PositionArg::Middle => Position::Middle,
                    PositionArg::Random => Position::Random,
                    PositionArg::Syntax => Position::Syntax,
                },
                strategy: match args.strategy {
                    StrategyArg::Early => Strategy::Early,
                    StrategyArg::Late => Strategy::Late,
                },
                folds,
                min_words: args.min_words,
                replacement_len: args.replacement_len,
                seed,
            };
            std::fs::create_dir_all(&args.out_dir).map_err(|e| ToolError::io(&args.out_dir, e))?;
            let datasets = emit_fold_datasets(&corpus, &cfg)?;
            let prov = provenance_for(Some(seed), &[&args.input])?;
            for fd in &datasets {
                let base = args.out_dir.join(format!("fold{}", fd.fold));
                jsonl::write_corpus(
                    &base.with_extension("train.jsonl"),
                    &fd.train,
                    Some(&prov),
                )?;
                jsonl::write_corpus(
                    &base.with_extension("predict.jsonl"),
                    &fd.predict,
                    Some(&prov),
                )?;
                records::write_records(&base.with_extension("records.jsonl"), &fd.records)?;
            }
            eprintln!("wrote {} folds to {}", datasets.len(), args.out_dir.display());
            Ok(())
        }
        Command::Remap(args) => {
            let preds = jsonl::read_corpus(&args.preds)?;
            let original = jsonl::read_corpus(&args.original)?;
            let recs = records::read_records(&args.records, &original)?;
            let (remapped, stats) = remap_predictions(&preds, &recs, &original)?;
            let prov = provenance_for(None, &[&args.preds, &args.records, &args.original])?;
            jsonl::write_corpus(&args.output, &remapped, Some(&prov))?;
            eprintln!(
                "remapped {} predictions, dropped {} overlapping an edit",
                stats.remapped, stats.dropped_overlapping
            );
            Ok(())
        }
        Command::PseudoMerge(args) => {
            let flat = jsonl::read_corpus(&args.flat)?;
            let preds = jsonl::read_corpus(&args.preds)?;
            let (merged, stats) = build_pseudo_nested(&flat, &preds)?;
            let prov = provenance_for(None, &[&args.flat, &args.preds])?;
            jsonl::write_corpus(&args.output, &merged, Some(&prov))?;
            eprintln!(
                "kept {} pseudo-nested predictions (dropped: {} flat duplicates, {} not nested)",
                stats.kept, stats.dropped_flat_duplicate, stats.dropped_not_nested
            );
            Ok(())
        }
        Command::Neutralize(args) => {
            let corpus = jsonl::read_corpus(&args.input)?;
            let dict = load_dict(args.dict.as_ref())?;
            let index = build_surface_index(&corpus, &dict);
            let mode = match args.mode {
                NeutralizeModeArg::Content => PartitionMode::ContentAware,
                NeutralizeModeArg::Geometric => PartitionMode::Geometric,
            };
            let match_kind = match args.match_kind {
                MatchArg::Exact => MatchKind::ExactSurface,
                MatchArg::Lemma => MatchKind::CanonicalForm,
            };
            let (mut labels, skipped) =
                partition_corpus(&corpus, &index, mode, match_kind, &dict, args.max_len)?;
            if let Some(aug_path) = &args.with_inclusions {
                let augmented = jsonl::read_corpus(aug_path)?;
                let mut inclusions: BTreeMap<String, Vec<(usize, usize, String)>> = BTreeMap::new();
                for (base_doc, aug_doc) in corpus.documents().iter().zip(augmented.documents()) {
                    if base_doc.doc_id() != aug_doc.doc_id() {
                        return Err(ToolError::Invalid(
                            "augmented corpus documents do not line up with the input".to_string(),
                        ));
                    }
                    let extra: Vec<(usize, usize, String)> = aug_doc
                        .mentions()
                        .iter()
                        .filter(|m| !base_doc.mentions().iter().any(|b| b.key() == m.key()))
                        .map(|m| m.to_triple())
                        .collect();
                    if !extra.is_empty() {
                        inclusions.insert(base_doc.doc_id().to_string(), extra);
                    }
                }
                let (flipped, flip_report) = with_inclusion_positives(labels, &inclusions);
                labels = flipped;
                eprintln!(
                    "inclusion positives: {} flipped, {} conflicts, {} unmatched",
                    flip_report.flipped, flip_report.conflicts, flip_report.unmatched
                );
            }
            for (doc_id, m) in &skipped {
                eprintln!(
                    "warning: mention {}:[{}..{}) {} has no candidate span (over {} tokens or not token-aligned)",
                    doc_id,
                    m.start(),
                    m.end(),
                    m.entity_type(),
                    args.max_len
                );
            }
            let prov = provenance_for(None, &[&args.input])?;
            labels::write_span_labels(&args.output, &labels, Some(&prov))?;
            eprintln!("wrote {} span labels", labels.len());
            Ok(())
        }
        Command::Eval(args) => {
            let gold = jsonl::read_corpus(&args.gold)?;
            let pred = jsonl::read_corpus(&args.pred)?;
            let rule = match args.containment {
                ContainmentArg::Literal => ContainmentRule::Literal,
                ContainmentArg::Strict => ContainmentRule::Strict,
            };
            let result = evaluate(&gold, &pred, rule)?;
            print!("{}", report::eval_report_text(&result));
            if let Some(out) = args.output {
                let prov = provenance_for(None, &[&args.gold, &args.pred])?;
                write_json(&out, &report::eval_report_json(&result, Some(&prov)))?;
            }
            Ok(())
        }
        Command::Llm(llm) => run_llm(llm, &config, jobs),
    }
}

fn build_endpoint(shared: &LlmShared) -> Result<Box<dyn ChatEndpoint>, ToolError> {
    let chosen = [
        shared.endpoint.is_some(),
        shared.mock.is_some(),
        shared.replay.is_some(),
    ]
    .iter()
    .filter(|x| **x)
    .count();
    if chosen != 1 {
        return Err(ToolError::Invalid(
            "exactly one of --endpoint, --mock, --replay is required".to_string(),
        ));
    }
    if let Some(url) = &shared.endpoint {
        let key = std::env::var("NESTWEAK_API_KEY")
            .or_else(|_| std::env::var("OPENAI_API_KEY"))
            .ok();
        return Ok(Box::new(HttpEndpoint::new(url, key)));
    }
    if let Some(path) = &shared.mock {
        return Ok(Box::new(MockEndpoint::from_file(path)?));
    }
    Ok(Box::new(ReplayEndpoint::from_file(
        shared.replay.as_ref().expect("replay path"),
    )?))
}

fn asset_arg(value: Option<&String>) -> Option<Option<PathBuf>> {
    // None = asset disabled; Some(None) = shipped default; Some(path) = file.
    match value {
        None => None,
        Some(s) if s == "default" => Some(None),
        Some(s) => Some(Some(PathBuf::from(s))),
    }
}

fn build_spec(
    shared: &LlmShared,
    shots: u8,
    selection: SelectionStrategy,
    seed: u64,
) -> Result<PromptSpec, ToolError> {
    let template = assets::load_template(shared.template.as_deref())?;
    let mut spec = PromptSpec::new(template, shots, selection, seed)?;
    if let Some(path) = asset_arg(shared.definitions.as_ref()) {
        spec.definitions = Some(assets::load_type_definitions(path.as_deref())?);
    }
    if let Some(path) = asset_arg(shared.patterns.as_ref()) {
        spec.nesting_patterns = Some(assets::load_nesting_patterns(path.as_deref())?);
    }
    Ok(spec)
}

fn run_report_json(report: &RunReport) -> serde_json::Value {
    serde_json::json!({
        "requests": report.requests,
        "failures": report
            .failures
            .iter()
            .map(|(unit, error)| serde_json::json!({"unit": unit, "error": error}))
            .collect::<Vec<_>>(),
        "parse_failures": report.parse_failures,
        "discarded_surfaces": report.discarded_surfaces,
        "dropped_self_spans": report.dropped_self_spans,
    })
}

fn finish_llm_run(
    shared: &LlmShared,
    preds: &Corpus,
    report: &RunReport,
    prov: Provenance,
) -> Result<(), ToolError> {
    jsonl::write_corpus(&shared.output, preds, Some(&prov))?;
    eprintln!(
        "{} requests, {} failures, {} parse failures, {} discarded surfaces",
        report.requests,
        report.failures.len(),
        report.parse_failures,
        report.discarded_surfaces
    );
    if let Some(path) = &shared.run_report {
        write_json(path, &run_report_json(report))?;
    }
    Ok(())
}

fn run_llm(command: LlmCommand, config: &FileConfig, jobs: usize) -> Result<(), ToolError> {
    match command {
        LlmCommand::Pure(args) => {
            let test = jsonl::read_corpus(&args.input)?;
            let seed = config.resolve(args.shared.seed, "seed", 0u64)?;
            let selection = match args.select {
                SelectArg::Random => SelectionStrategy::Random,
                SelectArg::Mfe => SelectionStrategy::Mfe,
                SelectArg::MfeEntwise => SelectionStrategy::MfeEntwise,
                SelectArg::MfeEntwiseSent => SelectionStrategy::MfeEntwiseSent,
            };
            let spec = build_spec(&args.shared, args.shots, selection, seed)?;
            let dict = load_dict(args.dict.as_ref())?;
            let needs_examples =
                args.shots > 0 || !matches!(selection, SelectionStrategy::Random);
            let examples = match (&args.train, needs_examples) {
                (Some(train_path), _) => {
                    let train = jsonl::read_corpus(train_path)?;
                    select_examples(&train, &spec, &dict)?
                }
                (None, false) => String::new(),
                (None, true) => {
                    return Err(ToolError::Invalid(
                        "--train is required for few-shot or entity-list selection".to_string(),
                    ))
                }
            };
            let params = GenParams {
                model: config.resolve(args.shared.model.clone(), "model", "local".to_string())?,
                ..GenParams::default()
            };
            let endpoint = build_endpoint(&args.shared)?;
            let writer = match &args.shared.record {
                Some(path) => Some(TranscriptWriter::create(path)?),
                None => None,
            };
            let opts = RunOptions {
                granularity: if args.per_document {
                    Granularity::Document
                } else {
                    Granularity::Sentence
                },
                occurrence: match args.shared.occurrence {
                    OccurrenceArg::First => Occurrence::First,
                    OccurrenceArg::All => Occurrence::All,
                },
                jobs,
                ..RunOptions::default()
            };
            let (preds, report) = run_pure(
                &test,
                &spec,
                &examples,
                &params,
                endpoint.as_ref(),
                writer.as_ref(),
                &opts,
            )?;
            let prov = provenance_for(Some(seed), &[&args.input])?;
            finish_llm_run(&args.shared, &preds, &report, prov)
        }
        LlmCommand::Hybrid(args) => {
            let outer = jsonl::read_corpus(&args.outer)?;
            let seed = config.resolve(args.shared.seed, "seed", 0u64)?;
            let spec = build_spec(&args.shared, 0, SelectionStrategy::Random, seed)?;
            let params = GenParams {
                model: config.resolve(args.shared.model.clone(), "model", "local".to_string())?,
                ..GenParams::default()
            };
            let endpoint = build_endpoint(&args.shared)?;
            let writer = match &args.shared.record {
                Some(path) => Some(TranscriptWriter::create(path)?),
                None => None,
            };
            let lemma = match &args.lemma_matching {
                Some(path) => Some(lemma_file::read_lemma_dictionary(path)?),
                None => None,
            };
            let opts = RunOptions {
                occurrence: match args.shared.occurrence {
                    OccurrenceArg::First => Occurrence::First,
                    OccurrenceArg::All => Occurrence::All,
                },
                jobs,
                lemma,
                ..RunOptions::default()
            };
            let (merged, report) = run_hybrid(
                &outer,
                &spec,
                &params,
                endpoint.as_ref(),
                writer.as_ref(),
                &opts,
            )?;
            let prov = provenance_for(Some(seed), &[&args.outer])?;
            finish_llm_run(&args.shared, &merged, &report, prov)
        }
    }
}
