//! Lemma dictionary files: UTF-8, `surface<TAB>lemma`, one pair per line,
//! `#` comments. Parsing lives in the core crate; this is the file wrapper.

use std::fs;
use std::path::Path;

use nestweak_core::lemma::LemmaDictionary;

use crate::error::ToolError;

pub fn read_lemma_dictionary(path: &Path) -> Result<LemmaDictionary, ToolError> {
    let text = fs::read_to_string(path).map_err(|e| ToolError::io(path, e))?;
    LemmaDictionary::parse(&text).map_err(ToolError::from)
}
