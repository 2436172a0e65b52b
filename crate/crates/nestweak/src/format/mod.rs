//! On-disk formats: the JSONL corpus format, standoff `.txt`/`.ann` pairs,
//! CoNLL-U dependency layers, corruption-record files, lemma dictionaries,
//! and the span-label export.

pub mod brat_files;
pub mod conllu;
pub mod jsonl;
pub mod labels;
pub mod lemma_file;
pub mod records;
