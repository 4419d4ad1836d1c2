//! Text normalization and tokenization shared by the pipeline and encoder.
//!
//! No language-specific analysis: Persian and English go through the same
//! path (NFC, lowercase, whitespace collapse, punctuation stripping).

use unicode_normalization::UnicodeNormalization;

const ZWNJ: char = '\u{200c}';

/// Characters that end a clause for the annotation rules.
const CLAUSE_BREAKS: &[char] = &['.', '!', '?', ';', ',', ':', '\n', '،', '؛', '؟', '…'];

/// NFC, lowercase, runs of whitespace collapsed to one space, trimmed.
pub fn normalize(text: &str) -> String {
    let nfc: String = text.nfc().collect::<String>().to_lowercase();
    let mut out = String::with_capacity(nfc.len());
    for word in nfc.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    out
}

fn clean_token(raw: &str) -> Option<String> {
    let t: String = raw
        .chars()
        .filter(|&c| c.is_alphanumeric() || c == ZWNJ)
        .collect();
    let t = t.trim_matches(ZWNJ);
    (!t.is_empty()).then(|| t.to_string())
}

/// Whitespace tokens of the normalized text with punctuation removed.
pub fn tokenize(text: &str) -> Vec<String> {
    normalize(text).split(' ').filter_map(clean_token).collect()
}

/// Tokens grouped by clause.
pub fn clauses(text: &str) -> Vec<Vec<String>> {
    normalize(text)
        .split(|c: char| CLAUSE_BREAKS.contains(&c))
        .map(|clause| clause.split(' ').filter_map(clean_token).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect()
}
