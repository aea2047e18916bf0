//! Loaders for the line-oriented resource files: segmentation lexicon,
//! basic-sense dictionary, and marker lexicon.

use std::path::Path;

use biyu_core::protocols::mip::BasicDictionary;
use biyu_core::textprep::Lexicon;

use crate::error::{Error, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Loads a `word<TAB>frequency<TAB>POS` lexicon file.
pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    let text = read_to_string(path)?;
    Lexicon::parse(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line,
        reason: e.reason,
    })
}

/// Loads a `word<TAB>basic_gloss` dictionary file.
pub fn load_dictionary(path: &Path) -> Result<BasicDictionary> {
    let text = read_to_string(path)?;
    BasicDictionary::parse(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        line: e.line,
        reason: e.reason,
    })
}

/// Loads a one-marker-per-line file; `#` comments and blanks skipped.
pub fn load_markers(path: &Path) -> Result<Vec<String>> {
    let text = read_to_string(path)?;
    Ok(text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}
