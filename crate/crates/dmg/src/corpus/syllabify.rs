use std::collections::HashMap;
use std::path::Path;

use crate::corpus::tokens::UNK;
use crate::error::{DmgError, Result};

/// Character -> toneless romanized syllable.
pub type PronDict = HashMap<char, String>;

/// Load a UTF-8 TSV of `character<TAB>syllable` lines. Blank lines and `#`
/// comments are skipped.
pub fn load_dict_tsv(path: &Path) -> Result<PronDict> {
    let text = std::fs::read_to_string(path)?;
    let mut dict = PronDict::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (ch, syl) = line.split_once('\t').ok_or_else(|| {
            DmgError::Corpus(format!("{}:{}: expected TAB", path.display(), lineno + 1))
        })?;
        let mut chars = ch.chars();
        let c = chars.next().ok_or_else(|| {
            DmgError::Corpus(format!("{}:{}: empty character", path.display(), lineno + 1))
        })?;
        if chars.next().is_some() {
            return Err(DmgError::Corpus(format!(
                "{}:{}: key must be a single character",
                path.display(),
                lineno + 1
            )));
        }
        dict.insert(c, syl.trim().to_string());
    }
    Ok(dict)
}

/// Map each character of a line to its syllable; unknown characters become
/// `_UNK_`. An empty line is an empty list.
pub fn syllabify(line: &str, dict: &PronDict) -> Vec<String> {
    line.chars()
        .map(|c| dict.get(&c).cloned().unwrap_or_else(|| UNK.to_string()))
        .collect()
}

/// Per-token dictionary pass used on corpus load: single characters found in
/// the dictionary are replaced, everything else passes through untouched.
pub fn apply_dict(tokens: &[String], dict: &PronDict) -> Vec<String> {
    tokens
        .iter()
        .map(|t| {
            let mut chars = t.chars();
            match (chars.next(), chars.next()) {
                (Some(c), None) => dict.get(&c).cloned().unwrap_or_else(|| t.clone()),
                _ => t.clone(),
            }
        })
        .collect()
}
