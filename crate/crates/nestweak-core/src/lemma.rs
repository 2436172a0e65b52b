//! Dictionary-driven lemmatization and canonical surface forms.
//!
//! A canonical form is the sorted, case-folded, lemmatized token sequence of
//! a surface string, joined with single spaces. It is what makes matching
//! robust to inflection: "России", "Россия" and "Россию" all canonicalize to
//! "россия" given a suitable dictionary.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::error::CoreError;
use crate::types::tokenize_str;

/// Case-folded token -> lemma lookup with identity fallback.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaDictionary {
    map: BTreeMap<String, String>,
}

impl LemmaDictionary {
    pub fn empty() -> LemmaDictionary {
        LemmaDictionary::default()
    }

    /// Parse the two-column dictionary format: `surface<TAB>lemma`, one pair
    /// per line, `#` starts a comment line. Both columns are case-folded.
    pub fn parse(text: &str) -> Result<LemmaDictionary, CoreError> {
        let mut map = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (surface, lemma) = line.split_once('\t').ok_or(CoreError::MalformedLine {
                line: idx + 1,
                detail: "expected surface<TAB>lemma".to_string(),
            })?;
            let surface = surface.trim().to_lowercase();
            let lemma = lemma.trim().to_lowercase();
            if surface.is_empty() || lemma.is_empty() {
                return Err(CoreError::MalformedLine {
                    line: idx + 1,
                    detail: "empty surface or lemma".to_string(),
                });
            }
            map.insert(surface, lemma);
        }
        Ok(LemmaDictionary { map })
    }

    pub fn from_pairs<I, S>(pairs: I) -> LemmaDictionary
    where
        I: IntoIterator<Item = (S, S)>,
        S: Into<String>,
    {
        let map = pairs
            .into_iter()
            .map(|(s, l)| (s.into().to_lowercase(), l.into().to_lowercase()))
            .collect();
        LemmaDictionary { map }
    }

    /// Lemma of a case-folded token; the token itself when absent.
    pub fn lemma_of(&self, token: &str) -> String {
        match self.map.get(token) {
            Some(lemma) => lemma.clone(),
            None => token.to_string(),
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

/// Lemmatize every token of `surface` (case-folded, identity fallback),
/// returning the lemmas in token order.
pub fn token_lemmas(surface: &str, dict: &LemmaDictionary) -> Vec<String> {
    tokenize_str(surface)
        .into_iter()
        .map(|t| dict.lemma_of(&t.to_lowercase()))
        .collect()
}

/// Canonical form: sorted lemmatized tokens joined with single spaces.
pub fn canonical_form(surface: &str, dict: &LemmaDictionary) -> String {
    let mut lemmas = token_lemmas(surface, dict);
    lemmas.sort_unstable();
    lemmas.join(" ")
}

/// Canonical form assembled from pre-computed token lemmas (used when a
/// caller slides windows over one mention and has lemmatized it once).
pub fn canonical_of_lemmas(lemmas: &[String]) -> String {
    let mut sorted: Vec<&str> = lemmas.iter().map(String::as_str).collect();
    sorted.sort_unstable();
    sorted.join(" ")
}
