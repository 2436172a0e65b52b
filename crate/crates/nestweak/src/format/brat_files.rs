//! Directory-level standoff IO: every `.txt` with a sibling `.ann` becomes
//! one document, named by its path relative to the root (without extension).

use std::fs;
use std::path::Path;

use nestweak_core::brat::{parse_brat, write_brat};
use nestweak_core::Corpus;
use walkdir::WalkDir;

use crate::error::ToolError;

/// Load all `.txt`/`.ann` pairs under `dir` into a corpus named `split`.
pub fn read_brat_dir(dir: &Path, split: &str) -> Result<Corpus, ToolError> {
    let mut docs = Vec::new();
    let mut txt_paths = Vec::new();
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| ToolError::Invalid(format!("{}: {e}", dir.display())))?;
        if entry.file_type().is_file()
            && entry.path().extension().is_some_and(|ext| ext == "txt")
        {
            txt_paths.push(entry.path().to_path_buf());
        }
    }
    if txt_paths.is_empty() {
        return Err(ToolError::Invalid(format!(
            "{}: no .txt files found",
            dir.display()
        )));
    }
    for txt_path in txt_paths {
        let ann_path = txt_path.with_extension("ann");
        if !ann_path.exists() {
            continue; // text without annotations is not part of the corpus
        }
        let txt = fs::read_to_string(&txt_path).map_err(|e| ToolError::io(&txt_path, e))?;
        let ann = fs::read_to_string(&ann_path).map_err(|e| ToolError::io(&ann_path, e))?;
        let doc_id = txt_path
            .strip_prefix(dir)
            .unwrap_or(&txt_path)
            .with_extension("")
            .to_string_lossy()
            .replace('\\', "/");
        let doc = parse_brat(&ann, &txt)
            .map_err(|e| ToolError::Invalid(format!("{}: {e}", ann_path.display())))?
            .with_doc_id(doc_id);
        docs.push(doc);
    }
    Ok(Corpus::from_documents(split, docs)?)
}

/// Write every document of the corpus as a `.txt`/`.ann` pair under `dir`.
pub fn write_brat_dir(dir: &Path, corpus: &Corpus) -> Result<(), ToolError> {
    fs::create_dir_all(dir).map_err(|e| ToolError::io(dir, e))?;
    for doc in corpus.documents() {
        let (ann, txt) = write_brat(doc);
        let base = dir.join(doc.doc_id());
        if let Some(parent) = base.parent() {
            fs::create_dir_all(parent).map_err(|e| ToolError::io(parent, e))?;
        }
        let txt_path = base.with_extension("txt");
        let ann_path = base.with_extension("ann");
        fs::write(&txt_path, txt).map_err(|e| ToolError::io(&txt_path, e))?;
        fs::write(&ann_path, ann).map_err(|e| ToolError::io(&ann_path, e))?;
    }
    Ok(())
}
